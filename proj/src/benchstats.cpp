#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mlkit/benchmark.hpp"
#include "mlkit/error.hpp"

namespace mlkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double lower_gamma_series(double a, double x) {
  double sum = 1.0 / a, del = sum, ap = a;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-14) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double upper_gamma_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-14) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

struct GlRule {
  std::vector<double> x, w;
};

// n-point Gauss-Legendre nodes/weights on [-1, 1]
GlRule gauss_legendre(int n) {
  GlRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double z1 = 2.0, pp = 0.0;
    while (std::abs(z - z1) > 1e-15) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      z1 = z;
      z = z1 - p0 / pp;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return r;
}

// critical values q(k, alpha), k = 2..10; two-sided at alpha.
// nemenyi: studentized range / sqrt(2); bd: normal z_{alpha/(2(k-1))}
struct QRow {
  double alpha;
  double q[9];
};

constexpr QRow kNemenyiQ[] = {
    {0.01, {2.807, 3.128, 3.319, 3.455, 3.559, 3.644, 3.716, 3.777, 3.831}},
    {0.05, {2.241, 2.604, 2.817, 2.968, 3.084, 3.177, 3.256, 3.324, 3.383}},
    {0.10, {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164}},
};

constexpr QRow kBonferroniDunnQ[] = {
    {0.01, {2.576, 2.807, 2.935, 3.023, 3.090, 3.144, 3.189, 3.227, 3.261}},
    {0.05, {1.960, 2.241, 2.394, 2.498, 2.576, 2.638, 2.690, 2.734, 2.773}},
    {0.10, {1.645, 1.960, 2.128, 2.241, 2.326, 2.394, 2.450, 2.498, 2.539}},
};

double lookup_q(const QRow* table, int k, double alpha,
                const std::string& test) {
  if (k < 2 || k > 10)
    throw ValueError("critical differences support 2 to 10 learners");
  for (int r = 0; r < 3; ++r)
    if (std::abs(table[r].alpha - alpha) < 1e-12) return table[r].q[k - 2];
  throw ValueError("no tabulated " + test +
                   " critical value for alpha (use 0.01, 0.05 or 0.1)");
}

// average ranks of v (1 = best); missing entries rank worst
std::vector<double> average_ranks(std::vector<double> v, bool minimize) {
  const int n = static_cast<int>(v.size());
  for (auto& x : v)
    if (is_missing(x)) x = minimize ? kInf : -kInf;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return minimize ? v[a] < v[b] : v[a] > v[b];
  });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && v[idx[j]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (i + 1 + j);
    for (int t = i; t < j; ++t) ranks[idx[t]] = avg;
    i = j;
  }
  return ranks;
}

int measure_column(const BenchmarkResult& bmr, const Measure& measure) {
  for (std::size_t i = 0; i < bmr.measures.size(); ++i)
    if (bmr.measures[i].id == measure.id) return static_cast<int>(i);
  throw ValueError("measure " + measure.id +
                   " was not recorded in this benchmark");
}

void check_shape(const BenchmarkResult& bmr) {
  if (bmr.learner_ids.size() < 2)
    throw ValueError("learner comparison needs at least two learners");
  if (bmr.task_ids.size() < 2)
    throw ValueError("learner comparison needs at least two tasks");
}

}  // namespace

double chi_square_upper_tail(double x, int df) {
  if (df < 1) throw ValueError("chi-square needs df >= 1");
  if (!(x > 0.0)) return 1.0;
  const double a = df / 2.0, xx = x / 2.0;
  const double p =
      xx < a + 1.0 ? 1.0 - lower_gamma_series(a, xx) : upper_gamma_cf(a, xx);
  return std::min(1.0, std::max(0.0, p));
}

double studentized_range_cdf(double q, int k) {
  if (k < 2) throw ValueError("studentized range needs k >= 2");
  if (!(q > 0.0)) return 0.0;
  static const GlRule gl = gauss_legendre(64);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    const double z = 8.0 * gl.x[i];
    s += 8.0 * gl.w[i] * normal_pdf(z) *
         std::pow(normal_cdf(z) - normal_cdf(z - q), k - 1);
  }
  return std::min(1.0, k * s);
}

std::vector<double> RankMatrixResult::mean_ranks() const {
  std::vector<double> out(learner_ids.size(), 0.0);
  for (std::size_t l = 0; l < learner_ids.size(); ++l) {
    for (int t = 0; t < ranks.cols; ++t) out[l] += ranks.at(static_cast<int>(l), t);
    out[l] /= ranks.cols;
  }
  return out;
}

Table RankMatrixResult::as_table() const {
  Table t;
  t.columns.push_back("learner.id");
  for (const auto& tid : task_ids) t.columns.push_back(tid);
  for (std::size_t l = 0; l < learner_ids.size(); ++l) {
    auto& row = t.add_row();
    row[0] = learner_ids[l];
    for (int c = 0; c < ranks.cols; ++c)
      row[c + 1] = ranks.at(static_cast<int>(l), c);
  }
  return t;
}

RankMatrixResult rank_matrix(const BenchmarkResult& bmr,
                             const Measure& measure) {
  if (bmr.learner_ids.empty() || bmr.task_ids.empty())
    throw ValueError("empty benchmark result");
  const int mi = measure_column(bmr, measure);
  const bool minimize = bmr.measures[mi].minimize;
  const std::string aggr = bmr.measures[mi].aggr_name();
  RankMatrixResult out;
  out.learner_ids = bmr.learner_ids;
  out.task_ids = bmr.task_ids;
  out.ranks = Matrix(static_cast<int>(bmr.learner_ids.size()),
                     static_cast<int>(bmr.task_ids.size()));
  for (std::size_t t = 0; t < bmr.task_ids.size(); ++t) {
    std::vector<double> vals;
    for (const auto& lid : bmr.learner_ids)
      vals.push_back(bmr.at(bmr.task_ids[t], lid).aggr_value(aggr));
    const std::vector<double> ranks = average_ranks(std::move(vals), minimize);
    for (std::size_t l = 0; l < bmr.learner_ids.size(); ++l)
      out.ranks.at(static_cast<int>(l), static_cast<int>(t)) = ranks[l];
  }
  return out;
}

RankMatrixResult rank_matrix(const BenchmarkResult& bmr) {
  if (bmr.measures.empty()) throw ValueError("benchmark has no measures");
  return rank_matrix(bmr, bmr.measures[0]);
}

FriedmanTestResult friedman_test(const BenchmarkResult& bmr,
                                 const Measure& measure) {
  check_shape(bmr);
  const RankMatrixResult rm = rank_matrix(bmr, measure);
  const int k = static_cast<int>(bmr.learner_ids.size());
  const double n = static_cast<double>(bmr.task_ids.size());
  double sum_r2 = 0.0;
  for (double r : rm.mean_ranks()) sum_r2 += r * r;
  FriedmanTestResult out;
  out.statistic =
      12.0 * n / (k * (k + 1.0)) * (sum_r2 - k * (k + 1.0) * (k + 1.0) / 4.0);
  if (out.statistic < 0.0 && out.statistic > -1e-12) out.statistic = 0.0;
  out.df = k - 1;
  out.p_value = chi_square_upper_tail(out.statistic, out.df);
  return out;
}

FriedmanTestResult friedman_test(const BenchmarkResult& bmr) {
  if (bmr.measures.empty()) throw ValueError("benchmark has no measures");
  return friedman_test(bmr, bmr.measures[0]);
}

Table NemenyiResult::as_table() const {
  Table t;
  t.columns.push_back("learner.id");
  for (const auto& lid : learner_ids) t.columns.push_back(lid);
  for (std::size_t i = 0; i < learner_ids.size(); ++i) {
    auto& row = t.add_row();
    row[0] = learner_ids[i];
    for (std::size_t j = 0; j < learner_ids.size(); ++j) {
      const double p = p_values.at(static_cast<int>(i), static_cast<int>(j));
      row[j + 1] = is_missing(p) ? json() : json(p);
    }
  }
  return t;
}

NemenyiResult friedman_posthoc_nemenyi(const BenchmarkResult& bmr,
                                       const Measure& measure) {
  check_shape(bmr);
  const RankMatrixResult rm = rank_matrix(bmr, measure);
  const int k = static_cast<int>(bmr.learner_ids.size());
  const double n = static_cast<double>(bmr.task_ids.size());
  NemenyiResult out;
  out.learner_ids = bmr.learner_ids;
  out.mean_ranks = rm.mean_ranks();
  out.p_values = Matrix(k, k);
  const double se = std::sqrt(k * (k + 1.0) / (6.0 * n));
  for (int i = 0; i < k; ++i) {
    out.p_values.at(i, i) = kMissing;
    for (int j = i + 1; j < k; ++j) {
      const double q =
          std::abs(out.mean_ranks[i] - out.mean_ranks[j]) / se * std::sqrt(2.0);
      const double p =
          std::min(1.0, std::max(0.0, 1.0 - studentized_range_cdf(q, k)));
      out.p_values.at(i, j) = p;
      out.p_values.at(j, i) = p;
    }
  }
  return out;
}

NemenyiResult friedman_posthoc_nemenyi(const BenchmarkResult& bmr) {
  if (bmr.measures.empty()) throw ValueError("benchmark has no measures");
  return friedman_posthoc_nemenyi(bmr, bmr.measures[0]);
}

Table CriticalDifferencesResult::as_table() const {
  Table t;
  t.columns = {"learner.id", "mean.rank"};
  for (std::size_t i = 0; i < learner_ids.size(); ++i) {
    auto& row = t.add_row();
    row[0] = learner_ids[i];
    row[1] = mean_ranks[i];
  }
  return t;
}

CriticalDifferencesResult critical_differences(const BenchmarkResult& bmr,
                                               const Measure& measure,
                                               const std::string& test,
                                               double alpha,
                                               const std::string& baseline) {
  check_shape(bmr);
  if (test != "nemenyi" && test != "bd")
    throw ValueError("critical differences test must be 'nemenyi' or 'bd'");
  const RankMatrixResult rm = rank_matrix(bmr, measure);
  const int k = static_cast<int>(bmr.learner_ids.size());
  const double n = static_cast<double>(bmr.task_ids.size());
  CriticalDifferencesResult out;
  out.test = test;
  out.alpha = alpha;
  out.learner_ids = bmr.learner_ids;
  out.mean_ranks = rm.mean_ranks();
  const double q =
      test == "nemenyi"
          ? lookup_q(kNemenyiQ, k, alpha, "nemenyi")
          : lookup_q(kBonferroniDunnQ, k, alpha, "bonferroni-dunn");
  out.cd = q * std::sqrt(k * (k + 1.0) / (6.0 * n));
  if (test == "nemenyi") {
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        if (std::abs(out.mean_ranks[i] - out.mean_ranks[j]) > out.cd)
          out.significant_pairs.push_back({i, j});
  } else {
    if (baseline.empty())
      throw ValueError("bonferroni-dunn needs a baseline learner id");
    const auto it = std::find(bmr.learner_ids.begin(), bmr.learner_ids.end(),
                              baseline);
    if (it == bmr.learner_ids.end())
      throw ValueError("baseline is not a benchmarked learner: " + baseline);
    const int b = static_cast<int>(it - bmr.learner_ids.begin());
    out.baseline = baseline;
    out.baseline_rank = out.mean_ranks[b];
    out.interval_lo = out.baseline_rank - out.cd;
    out.interval_hi = out.baseline_rank + out.cd;
    for (int i = 0; i < k; ++i)
      if (i != b &&
          std::abs(out.mean_ranks[i] - out.baseline_rank) > out.cd)
        out.significant_pairs.push_back({std::min(b, i), std::max(b, i)});
  }
  return out;
}

}  // namespace mlkit
