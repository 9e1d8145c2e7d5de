#include "aggwind/data.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "aggwind/errors.hpp"
#include "aggwind/text.hpp"

namespace aggwind {

namespace {

Eigen::MatrixXd mat2(double a, double b, double c) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, b, c;
  return m;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

GroundTruth GroundTruth::builtin(std::uint64_t seed) {
  GroundTruth gt;
  gt.gmm.weights = {0.5, 0.3, 0.2};
  gt.gmm.means = {vec2(0.0, 0.0), vec2(3.0, 2.0), vec2(-2.5, 2.5)};
  gt.gmm.covariances = {mat2(0.5, 0.3, 0.4), mat2(0.25, -0.1, 0.35), mat2(0.3, 0.125, 0.2)};
  gt.samples_per_day = 96;
  gt.seed = seed;
  return gt;
}

Samples draw_samples(const GmmParams& gmm, Eigen::Index count, std::uint64_t seed) {
  gmm.validate();
  const int d = gmm.dim();
  std::vector<Eigen::MatrixXd> factors;
  for (const auto& cov : gmm.covariances) factors.emplace_back(Eigen::LLT<Eigen::MatrixXd>(cov).matrixL());
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::discrete_distribution<int> pick(gmm.weights.begin(), gmm.weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  Samples out(d, count);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(pick(rng));
    for (int r = 0; r < d; ++r) z(r) = normal(rng);
    out.col(i) = gmm.means[j] + factors[j] * z;
  }
  return out;
}

std::vector<LocalDataset> partition(const Samples& train, int farm_count, Partitioning partitioning) {
  if (farm_count < 1) throw InvalidArgument("need at least one farm");
  const Eigen::Index n = train.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (partitioning == Partitioning::kSorted) {
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return train(0, a) < train(0, b); });
  }
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(farm_count));
  for (Eigen::Index k = 0; k < n; ++k) {
    std::size_t farm = 0;
    if (partitioning == Partitioning::kRoundRobin) {
      farm = static_cast<std::size_t>(k % farm_count);
    } else {
      farm = static_cast<std::size_t>(k * farm_count / n);
    }
    members[farm].push_back(order[static_cast<std::size_t>(k)]);
  }
  std::vector<LocalDataset> out;
  for (int f = 0; f < farm_count; ++f) {
    const auto& idx = members[static_cast<std::size_t>(f)];
    LocalDataset ds{NodeId{f + 1}, Samples(train.rows(), static_cast<Eigen::Index>(idx.size()))};
    for (std::size_t k = 0; k < idx.size(); ++k) ds.samples.col(static_cast<Eigen::Index>(k)) = train.col(idx[k]);
    out.push_back(std::move(ds));
  }
  return out;
}

GeneratedData generate(const GroundTruth& truth, int farm_count, Partitioning partitioning) {
  if (truth.samples_per_day < 1) throw InvalidArgument("samples_per_day must be at least 1");
  const Eigen::Index per_day = truth.samples_per_day;
  const Samples all = draw_samples(truth.gmm, per_day * (kTrainDays + kTestDays), truth.seed);
  GeneratedData out;
  out.window.samples_per_day = truth.samples_per_day;
  out.window.train = all.leftCols(per_day * kTrainDays);
  out.window.test = all.rightCols(per_day * kTestDays);
  out.local = partition(out.window.train, farm_count, partitioning);
  return out;
}

Samples pool(const std::vector<LocalDataset>& local) {
  if (local.empty()) throw InvalidArgument("no local datasets");
  std::vector<const LocalDataset*> sorted;
  for (const auto& ds : local) sorted.push_back(&ds);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->owner < b->owner; });
  Eigen::Index total = 0;
  for (const auto* ds : sorted) total += ds->samples.cols();
  Samples out(sorted.front()->samples.rows(), total);
  Eigen::Index at = 0;
  for (const auto* ds : sorted) {
    out.middleCols(at, ds->samples.cols()) = ds->samples;
    at += ds->samples.cols();
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string window_to_csv(const DatasetWindow& window) {
  std::string out = "day,step,awo_err,fwo_err\n";
  const Eigen::Index per_day = window.samples_per_day;
  auto emit = [&](const Samples& s, int day0) {
    for (Eigen::Index i = 0; i < s.cols(); ++i) {
      out += std::to_string(day0 + i / per_day) + "," + std::to_string(i % per_day) + "," +
             text::format_double(s(0, i)) + "," + text::format_double(s(1, i)) + "\n";
    }
  };
  emit(window.train, 0);
  emit(window.test, kTrainDays);
  return out;
}

DatasetWindow parse_window_csv(const std::string& contents) {
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<double> train, test;
  int max_step = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      if (t != "day,step,awo_err,fwo_err") throw ParseError("expected header day,step,awo_err,fwo_err", line_no);
      header_seen = true;
      continue;
    }
    const auto cols = text::split(t, ',');
    if (cols.size() != 4) throw ParseError("expected 4 columns", line_no);
    const auto day = text::parse_int(cols[0]);
    const auto step = text::parse_int(cols[1]);
    const auto awo = text::parse_double(cols[2]);
    const auto fwo = text::parse_double(cols[3]);
    if (!day || !step || !awo || !fwo || *day < 0 || *step < 0) throw ParseError("malformed row", line_no);
    max_step = std::max(max_step, static_cast<int>(*step));
    auto& dst = *day < kTrainDays ? train : test;
    dst.push_back(*awo);
    dst.push_back(*fwo);
  }
  if (!header_seen) throw ParseError("empty data file", line_no);
  if (train.empty() || test.empty()) throw InvalidArgument("data file has an empty training or testing window");
  DatasetWindow w;
  w.samples_per_day = max_step + 1;
  w.train = Eigen::Map<const Samples>(train.data(), 2, static_cast<Eigen::Index>(train.size() / 2));
  w.test = Eigen::Map<const Samples>(test.data(), 2, static_cast<Eigen::Index>(test.size() / 2));
  return w;
}

void save_csv(const DatasetWindow& window, const std::string& path) { text::write_file(path, window_to_csv(window)); }

DatasetWindow load_csv(const std::string& path) { return parse_window_csv(text::read_file(path)); }

}  // namespace aggwind
