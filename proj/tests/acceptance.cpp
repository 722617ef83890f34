// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "binrbm/binrbm.hpp"
#include "cli.hpp"
#include "oracles.hpp"

using namespace binrbm;

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

Vector random_bits(std::size_t m, std::mt19937_64& gen) {
  Vector v(m);
  for (double& x : v) x = static_cast<double>(gen() & 1u);
  return v;
}

// |F(v) + log sum_h e^{-E(v,h)}| over every visible vector.
Outcome free_energy_identity() {
  std::mt19937_64 gen(101);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t m = 1 + gen() % 8, n = 1 + gen() % 8;
    const RbmParams p = oracle::random_params(m, n, gen, 2.0);
    for (std::uint64_t vm = 0; vm < (1ULL << m); ++vm) {
      const Vector v = oracle::bits(vm, m);
      worst = std::max(worst, std::abs(free_energy(v, p) + oracle::log_marginal_unnormalized(v, p)));
    }
  }
  return {worst <= 1e-9, "max deviation " + sci(worst)};
}

// log PF from the joint sum vs log sum_v e^{-F(v)}.
Outcome partition_cross_check() {
  std::mt19937_64 gen(202);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t m = 1 + gen() % 10;
    const std::size_t n = 1 + gen() % (14 - m);
    const RbmParams p = oracle::random_params(m, n, gen, 1.5);
    std::vector<double> terms;
    for (std::uint64_t vm = 0; vm < (1ULL << m); ++vm) terms.push_back(-free_energy(oracle::bits(vm, m), p));
    worst = std::max(worst, std::abs(log_partition_function(p) - oracle::log_sum_exp(terms)));
    worst = std::max(worst, std::abs(std::log(exact_partition_function(p)) - oracle::log_sum_exp(terms)));
  }
  return {worst <= 1e-9, "max deviation " + sci(worst)};
}

Outcome conditionals() {
  std::mt19937_64 gen(303);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t m = 1 + gen() % 6, n = 1 + gen() % 6;
    const RbmParams p = oracle::random_params(m, n, gen, 1.5);
    for (std::uint64_t vm = 0; vm < (1ULL << m); ++vm) {
      const Vector v = oracle::bits(vm, m);
      const Vector got = hidden_probs(v, p), want = oracle::exact_hidden_conditional(v, p);
      for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(got[j] - want[j]));
    }
    for (std::uint64_t hm = 0; hm < (1ULL << n); ++hm) {
      const Vector h = oracle::bits(hm, n);
      const Vector got = visible_probs(h, p), want = oracle::exact_visible_conditional(h, p);
      for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    }
  }
  return {worst <= 1e-10, "max deviation " + sci(worst)};
}

// Marginals within 3 sigma; pairwise sample correlations within 3 sigma of 0.
Outcome sampler_statistics() {
  const Vector target{0.02, 0.3, 0.5, 0.71, 0.97};
  const std::size_t draws = 10000;
  SeededRng rng(404);
  Matrix samples(draws, target.size());
  for (std::size_t d = 0; d < draws; ++d) {
    const Vector s = sample_bits(target, rng);
    std::copy(s.begin(), s.end(), samples.row(d).begin());
  }
  bool ok = true;
  double worst_z = 0.0;
  Vector mean(target.size(), 0.0);
  for (std::size_t i = 0; i < target.size(); ++i) {
    for (std::size_t d = 0; d < draws; ++d) mean[i] += samples(d, i);
    mean[i] /= double(draws);
    const double sigma = std::sqrt(target[i] * (1 - target[i]) / double(draws));
    const double z = std::abs(mean[i] - target[i]) / sigma;
    worst_z = std::max(worst_z, z);
    ok = ok && z <= 3.0;
  }
  double worst_corr_z = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i)
    for (std::size_t j = i + 1; j < target.size(); ++j) {
      double cov = 0.0, vi = 0.0, vj = 0.0;
      for (std::size_t d = 0; d < draws; ++d) {
        const double a = samples(d, i) - mean[i], b = samples(d, j) - mean[j];
        cov += a * b;
        vi += a * a;
        vj += b * b;
      }
      const double corr = cov / std::sqrt(vi * vj);
      const double z = std::abs(corr) * std::sqrt(double(draws));
      worst_corr_z = std::max(worst_corr_z, z);
      ok = ok && z <= 3.0;
    }
  return {ok, "worst marginal z " + sci(worst_z) + ", worst correlation z " +
                  sci(worst_corr_z)};
}

Outcome learning_improves_likelihood() {
  Matrix data;
  const Vector a{1, 1, 1, 0, 0, 0}, b{0, 0, 0, 1, 1, 1};
  for (int k = 0; k < 10; ++k) {
    data.append_row(a);
    data.append_row(b);
  }
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TrainConfig c;
    c.hidden_units = 4;
    c.epochs = 50;
    c.init_weight_scale = 0.01;
    c.seed = seed;
    SeededRng rng(seed);
    const RbmParams initial = initial_params(6, c, rng);
    const RbmParams trained = train_rbm(data, c);
    if (exact_log_likelihood(data, trained) > exact_log_likelihood(data, initial)) ++improved;
  }
  return {improved >= 18, std::to_string(improved) + "/20 seeds improved"};
}

Outcome synthetic_classification() {
  int good = 0;
  double worst_acc = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabeledDataset ds = synth_generate({2, 200, 100, 1.0, 0.05, seed});
    const SplitResult parts = split(ds, {0.5, seed + 1000, true});
    TrainConfig c;
    c.seed = seed + 2000;
    const ClassEnsemble e = train_ensemble(parts.train, c, {});
    const EvalReport r = evaluate(predict_labels(parts.test.features, e), parts.test.labels);
    worst_acc = std::min(worst_acc, r.accuracy);
    if (r.accuracy >= 0.99 && r.recall(0).value_or(0) >= 0.95 && r.recall(1).value_or(0) >= 0.95) ++good;
  }
  return {good >= 9, std::to_string(good) + "/10 seeds met, worst accuracy " + sci(worst_acc)};
}

Outcome binarization_monotonicity() {
  std::mt19937_64 gen(707);
  std::uniform_real_distribution<double> u(-1.0, 5.0);
  Matrix m(50, 50);
  for (double& x : m.data()) x = u(gen);
  const double alphas[] = {1.0 / 5, 1.0 / 4, 1.0 / 3, 2.0 / 5, 1.0 / 2, 3.0 / 5, 2.0 / 3, 3.0 / 4, 4.0 / 5};
  bool ok = true;
  std::string counts;
  double previous = 1e300;
  for (double alpha : alphas) {
    const Matrix out = preprocess_pipeline(m, {alpha, RangeScope::PerMatrix});
    double ones = 0;
    for (double x : out.data()) {
      ok = ok && (x == 0.0 || x == 1.0);
      ones += x;
    }
    ok = ok && ones <= previous;
    previous = ones;
    counts += (counts.empty() ? "" : ",") + std::to_string(static_cast<long>(ones));
  }
  return {ok, "ones per alpha " + counts};
}

Outcome softmax_properties() {
  std::mt19937_64 gen(808);
  ClassEnsemble e;
  e.classes = {0, 1, 2};
  for (int k = 0; k < 3; ++k) e.models.push_back(oracle::random_params(10, 6, gen, 1.0));
  e.offsets = {0.0, 0.7, -1.3};
  ClassEnsemble shifted = e, huge = e;
  for (double& b : shifted.offsets) b += 1000.0;
  huge.offsets = {1000.0, -1000.0, 1000.0};

  bool ok = true;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vector v = random_bits(10, gen);
    const Vector p = predict_proba(v, e);
    double sum = 0.0;
    for (double x : p) sum += x;
    worst = std::max(worst, std::abs(sum - 1.0));
    ok = ok && predict_label(v, shifted) == predict_label(v, e);
    for (double x : predict_proba(v, huge)) ok = ok && std::isfinite(x);
    for (double x : predict_proba(v, shifted)) ok = ok && std::isfinite(x);
  }
  return {ok && worst <= 1e-12, "max |sum-1| " + sci(worst)};
}

Outcome markov_equilibrium() {
  std::mt19937_64 gen(909);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int chains = 0;
  while (chains < 20) {
    // Sparse random chains; only regular ones count.
    Matrix t(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 5; ++j) sum += t(i, j) = u(gen) < 0.5 ? u(gen) : 0.0;
      if (sum == 0.0) sum += t(i, i) = 1.0;
      for (std::size_t j = 0; j < 5; ++j) t(i, j) /= sum;
    }
    const markov::TransitionMatrix chain(t);
    if (!markov::is_regular(chain, 64)) continue;
    ++chains;
    const Vector v = markov::equilibrium_vector(chain, 1e-13, 10'000'000).probs();
    const Matrix next = oracle::naive_product(Matrix::from_rows({v}), t);
    for (std::size_t i = 0; i < 5; ++i) worst = std::max(worst, std::abs(next(0, i) - v[i]));
  }
  double worst_closed = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double a = 0.01 + 0.98 * u(gen), b = 0.01 + 0.98 * u(gen);
    const markov::TransitionMatrix chain(Matrix{{1 - a, a}, {b, 1 - b}});
    const Vector v = markov::equilibrium_vector(chain, 1e-13, 10'000'000).probs();
    worst_closed = std::max(worst_closed, std::abs(v[0] - b / (a + b)));
    worst_closed = std::max(worst_closed, std::abs(v[1] - a / (a + b)));
  }
  return {worst <= 1e-10 && worst_closed <= 1e-10,
          "residual " + sci(worst) + ", closed-form error " + sci(worst_closed)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string without_timestamp(const std::string& path) {
  std::istringstream in(slurp(path));
  std::string line, out;
  while (std::getline(in, line))
    if (!line.starts_with("run.timestamp_utc=")) out += line + '\n';
  return out;
}

Outcome determinism() {
  std::string failures;
  auto check = [&](bool same, const char* what) {
    if (!same) failures += std::string(failures.empty() ? "" : ", ") + what;
  };

  TrainConfig c;
  c.hidden_units = 12;
  c.epochs = 5;
  c.seed = 77;
  const LabeledDataset ds = synth_generate({2, 50, 30, 1.0, 0.05, 5});
  check(synth_generate({2, 50, 30, 1.0, 0.05, 5}).features == ds.features, "synth");
  check(train_rbm(ds.features, c) == train_rbm(ds.features, c), "train_rbm");
  check(split(ds, {0.5, 6, true}).train_indices == split(ds, {0.5, 6, true}).train_indices, "split");

  // The whole CLI pipeline twice into the same paths; every output must repeat.
  oracle::TempDir dir("accept");
  const std::vector<std::vector<std::string>> steps = {
      {"synth", "--dim", "40", "-n", "60", "--seed", "3", "--out", dir.file("all.csv")},
      {"split", dir.file("all.csv"), "--train-out", dir.file("train.csv"), "--test-out",
       dir.file("test.csv"), "--seed", "4"},
      {"train", dir.file("train.csv"), "--out", dir.file("m.rbme"), "--hidden", "16", "--epochs", "10",
       "--seed", "5"},
      {"evaluate", dir.file("m.rbme"), dir.file("test.csv"), "--report-out", dir.file("report.txt")},
  };
  const std::vector<std::string> outputs = {"all.csv", "train.csv", "test.csv", "m.rbme", "report.txt"};
  std::map<std::string, std::string> first;
  std::string first_manifest;
  for (int round = 0; round < 2; ++round) {
    for (auto args : steps) {
      args.insert(args.begin(), "binrbm");
      std::ostringstream out, err;
      if (cli::run(args, out, err) != 0) return {false, "CLI step failed: " + err.str()};
    }
    for (const auto& name : outputs) {
      if (round == 0) first[name] = slurp(dir.file(name));
      else check(first[name] == slurp(dir.file(name)), name.c_str());
    }
    if (round == 0) first_manifest = without_timestamp(dir.file("m.rbme.manifest"));
    else check(first_manifest == without_timestamp(dir.file("m.rbme.manifest")), "manifest");
  }
  return {failures.empty(), failures.empty() ? "all artifacts identical" : "differs: " + failures};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
    double time_limit_s;  // 0 = no limit
  };
  const Criterion criteria[] = {
      {1, "free-energy identity", free_energy_identity, 5},
      {2, "partition-function cross-check", partition_cross_check, 10},
      {3, "conditional correctness", conditionals, 0},
      {4, "sampler statistics", sampler_statistics, 0},
      {5, "learning improves likelihood", learning_improves_likelihood, 30},
      {6, "synthetic classification", synthetic_classification, 60},
      {7, "binarization monotonicity", binarization_monotonicity, 0},
      {8, "soft-max properties", softmax_properties, 0},
      {9, "markov equilibrium", markov_equilibrium, 0},
      {10, "determinism", determinism, 0},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += " (over time limit)";
    }
    failed += !o.pass;
    std::printf("%s criterion %2d  %-32s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
