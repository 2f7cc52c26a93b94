#include "locus/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "locus/errors.hpp"
#include "locus/quantiles.hpp"
#include "locus/rng.hpp"

namespace locus {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v)) {
    throw ValidationError("csv: non-numeric cell \"" + cell + "\" at data row " +
                          std::to_string(row) + ", column \"" + column + "\"");
  }
  return v;
}

}  // namespace

TabularData load_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw ValidationError("csv: cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file: " + path);
  std::vector<std::string> header = split_csv_line(line);

  std::size_t target_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == target_column) target_idx = j;
  }
  if (target_idx == header.size()) {
    throw ValidationError("csv: target column \"" + target_column + "\" not in header");
  }

  TabularData data;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != target_idx) data.column_names.push_back(header[j]);
  }

  std::vector<double> flat;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    ++row;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError("csv: row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = parse_cell(cells[j], row, header[j]);
      if (j == target_idx) {
        data.target.push_back(v);
      } else {
        flat.push_back(v);
      }
    }
  }
  if (row == 0) throw ValidationError("csv: no data rows in " + path);
  if (header.size() < 2) {
    throw ValidationError("csv: need at least one feature column besides the target");
  }
  data.features = Matrix(row, header.size() - 1, std::move(flat));
  return data;
}

std::pair<Matrix, std::vector<std::string>> load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("csv: cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file: " + path);
  std::vector<std::string> header = split_csv_line(line);

  std::vector<double> flat;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    ++row;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError("csv: row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      flat.push_back(parse_cell(cells[j], row, header[j]));
    }
  }
  return {Matrix(row, header.size(), std::move(flat)), std::move(header)};
}

void write_csv(const std::string& path, const TabularData& data,
               const std::string& target_column) {
  std::ofstream out(path);
  if (!out) throw ValidationError("csv: cannot write file: " + path);
  for (const auto& name : data.column_names) out << name << ',';
  out << target_column << '\n';
  char buf[40];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.features.at(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", data.target[i]);
    out << buf << '\n';
  }
}

// ---------------------------------------------------------------------------
// Standardizer
// ---------------------------------------------------------------------------

namespace {

std::pair<double, double> mean_and_population_sd(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s2 = 0.0;
  for (double x : v) s2 += (x - m) * (x - m);
  return {m, std::sqrt(s2 / static_cast<double>(v.size()))};
}

}  // namespace

Standardizer fit_standardizer(const TabularData& data) {
  if (data.size() == 0) throw ValidationError("standardizer: empty data");
  Standardizer s;
  std::vector<double> col(data.size());
  for (std::size_t j = 0; j < data.dim(); ++j) {
    for (std::size_t i = 0; i < data.size(); ++i) col[i] = data.features.at(i, j);
    auto [m, sd] = mean_and_population_sd(col);
    if (!(sd > 0.0)) {
      throw ValidationError("standardizer: constant column \"" +
                            data.column_names[j] + "\"");
    }
    s.feature_means.push_back(m);
    s.feature_sds.push_back(sd);
  }
  auto [tm, tsd] = mean_and_population_sd(data.target);
  if (!(tsd > 0.0)) throw ValidationError("standardizer: constant target column");
  s.target_mean = tm;
  s.target_sd = tsd;
  return s;
}

Matrix standardize_features(const Standardizer& s, const Matrix& features) {
  if (features.cols != s.feature_means.size()) {
    throw ValidationError("standardizer: feature count mismatch");
  }
  Matrix out = features;
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t j = 0; j < out.cols; ++j) {
      out.at(i, j) = (out.at(i, j) - s.feature_means[j]) / s.feature_sds[j];
    }
  }
  return out;
}

TabularData apply_standardizer(const Standardizer& s, const TabularData& data) {
  TabularData out = data;
  out.features = standardize_features(s, data.features);
  for (double& y : out.target) y = (y - s.target_mean) / s.target_sd;
  return out;
}

TabularData invert_standardizer(const Standardizer& s, const TabularData& data) {
  TabularData out = data;
  for (std::size_t i = 0; i < out.features.rows; ++i) {
    for (std::size_t j = 0; j < out.features.cols; ++j) {
      out.features.at(i, j) = out.features.at(i, j) * s.feature_sds[j] + s.feature_means[j];
    }
  }
  for (double& y : out.target) y = y * s.target_sd + s.target_mean;
  return out;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

SplitDataset make_splits(const TabularData& data, const SplitFractions& f,
                         double cal_d1_fraction, std::uint64_t seed) {
  const double parts[4] = {f.train, f.calibration, f.validation, f.test};
  double sum = 0.0;
  for (double v : parts) {
    if (!(v > 0.0)) throw ValidationError("make_splits: fractions must be positive");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("make_splits: fractions must sum to 1");
  }
  if (!(cal_d1_fraction > 0.0 && cal_d1_fraction < 1.0)) {
    throw ValidationError("make_splits: cal_d1_fraction must be in (0, 1)");
  }

  const std::size_t n = data.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(idx);

  auto floor_count = [n](double frac) {
    return static_cast<std::size_t>(std::floor(frac * static_cast<double>(n)));
  };
  std::size_t n_cal = floor_count(f.calibration);
  std::size_t n_val = floor_count(f.validation);
  std::size_t n_test = floor_count(f.test);
  std::size_t n_train = n - n_cal - n_val - n_test;  // floor share + remainder
  std::size_t n_d1 = static_cast<std::size_t>(
      std::floor(cal_d1_fraction * static_cast<double>(n_cal)));
  std::size_t n_d2 = n_cal - n_d1;

  if (n_train == 0 || n_d1 == 0 || n_d2 == 0 || n_val == 0 || n_test == 0) {
    throw ValidationError("make_splits: a split is empty (n=" + std::to_string(n) +
                          " -> train " + std::to_string(n_train) + ", d1 " +
                          std::to_string(n_d1) + ", d2 " + std::to_string(n_d2) +
                          ", validation " + std::to_string(n_val) + ", test " +
                          std::to_string(n_test) + ")");
  }

  SplitDataset s;
  s.seed = seed;
  s.fractions = f;
  s.cal_d1_fraction = cal_d1_fraction;
  auto cursor = idx.begin();
  auto take = [&cursor](std::size_t count) {
    std::vector<std::size_t> part(cursor, cursor + static_cast<std::ptrdiff_t>(count));
    cursor += static_cast<std::ptrdiff_t>(count);
    return part;
  };
  s.train_idx = take(n_train);
  s.cal_d1_idx = take(n_d1);
  s.cal_d2_idx = take(n_d2);
  s.validation_idx = take(n_val);
  s.test_idx = take(n_test);

  s.train = data.take_rows(s.train_idx);
  s.cal_d1 = data.take_rows(s.cal_d1_idx);
  s.cal_d2 = data.take_rows(s.cal_d2_idx);
  s.validation = data.take_rows(s.validation_idx);
  s.test = data.take_rows(s.test_idx);
  return s;
}

std::uint64_t split_hash(const SplitDataset& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto fold = [&h](const std::vector<std::size_t>& part) {
    for (std::size_t v : part) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 0x100000001b3ull;
      }
    }
    h ^= 0x2d;  // separator
    h *= 0x100000001b3ull;
  };
  fold(s.train_idx);
  fold(s.cal_d1_idx);
  fold(s.cal_d2_idx);
  fold(s.validation_idx);
  fold(s.test_idx);
  return h;
}

// ---------------------------------------------------------------------------
// Synthetic generator and oracle
// ---------------------------------------------------------------------------

std::string noise_name(NoiseFamily f) {
  return f == NoiseFamily::kGaussian ? "gaussian" : "student_t";
}

NoiseFamily parse_noise(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::kGaussian;
  if (name == "student_t") return NoiseFamily::kStudentT;
  throw ValidationError("unknown noise family: " + name);
}

SyntheticOracle::SyntheticOracle(SyntheticSpec spec) : spec_(std::move(spec)) {
  if (spec_.dim == 0) throw ValidationError("synthetic: dim must be >= 1");
  if (spec_.mean_fn == "linear") {
    if (spec_.mean_params.size() != spec_.dim + 1) {
      throw ValidationError("synthetic: linear mean needs 1 + dim parameters");
    }
  } else if (spec_.mean_fn == "sine" || spec_.mean_fn == "quadratic") {
    if (spec_.mean_params.size() != 3) {
      throw ValidationError("synthetic: " + spec_.mean_fn + " mean needs 3 parameters");
    }
  } else {
    throw ValidationError("synthetic: unknown mean_fn: " + spec_.mean_fn);
  }
  if (spec_.scale_fn == "constant") {
    if (spec_.scale_params.size() != 1) {
      throw ValidationError("synthetic: constant scale needs 1 parameter");
    }
  } else if (spec_.scale_fn == "linear_abs") {
    if (spec_.scale_params.size() != 2) {
      throw ValidationError("synthetic: linear_abs scale needs 2 parameters");
    }
  } else if (spec_.scale_fn == "sine") {
    if (spec_.scale_params.size() != 3) {
      throw ValidationError("synthetic: sine scale needs 3 parameters");
    }
  } else {
    throw ValidationError("synthetic: unknown scale_fn: " + spec_.scale_fn);
  }
  if (spec_.design != "uniform" && spec_.design != "gaussian") {
    throw ValidationError("synthetic: unknown design: " + spec_.design);
  }
  if (spec_.design_params.size() != 2 && spec_.design_params.size() != 2 * spec_.dim) {
    throw ValidationError("synthetic: design needs 2 parameters (or 2 per coordinate)");
  }
  if (spec_.noise == NoiseFamily::kStudentT && !(spec_.student_df > 0.0)) {
    throw ValidationError("synthetic: student_df must be positive");
  }
}

double SyntheticOracle::mean(std::span<const double> x) const {
  const auto& p = spec_.mean_params;
  if (spec_.mean_fn == "linear") {
    double v = p[0];
    for (std::size_t j = 0; j < spec_.dim; ++j) v += p[j + 1] * x[j];
    return v;
  }
  if (spec_.mean_fn == "sine") return p[0] * std::sin(p[1] * x[0]) + p[2] * x[0];
  return p[0] * x[0] * x[0] + p[1] * x[0] + p[2];  // quadratic
}

double SyntheticOracle::scale(std::span<const double> x) const {
  const auto& p = spec_.scale_params;
  if (spec_.scale_fn == "constant") return p[0];
  if (spec_.scale_fn == "linear_abs") return p[0] + p[1] * std::abs(x[0]);
  return p[0] + p[1] * std::sin(p[2] * x[0]);  // sine
}

double SyntheticOracle::noise_cdf(double u) const {
  if (spec_.noise == NoiseFamily::kGaussian) {
    return 0.5 * std::erfc(-u / std::sqrt(2.0));
  }
  boost::math::students_t_distribution<double> t(spec_.student_df);
  return boost::math::cdf(t, u);
}

double SyntheticOracle::noise_quantile(double p) const {
  if (spec_.noise == NoiseFamily::kGaussian) {
    boost::math::normal_distribution<double> n01;
    return boost::math::quantile(n01, p);
  }
  boost::math::students_t_distribution<double> t(spec_.student_df);
  return boost::math::quantile(t, p);
}

double SyntheticOracle::loss_cdf(double z, std::span<const double> x, double gx,
                                 LossKind loss) const {
  if (z < 0.0) return 0.0;
  double level = loss == LossKind::kSquared ? std::sqrt(z) : z;
  double d = gx - mean(x);
  double s = scale(x);
  // Z_abs = |d - s*eps|; the noise families are symmetric about 0.
  return noise_cdf((d + level) / s) - noise_cdf((d - level) / s);
}

double SyntheticOracle::loss_quantile(double level, std::span<const double> x,
                                      double gx, LossKind loss) const {
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("loss_quantile: level must be in (0, 1)");
  }
  double lo = 0.0;
  double hi = std::max(1.0, std::abs(gx - mean(x)) + scale(x));
  int doublings = 0;
  while (loss_cdf(hi, x, gx, loss) < level) {
    hi *= 2.0;
    if (++doublings > 200) {
      throw ComputationError("loss_quantile: bracket expansion failed");
    }
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (loss_cdf(mid, x, gx, loss) >= level) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double SyntheticOracle::exceed_prob(double tau, std::span<const double> x, double gx,
                                    LossKind loss) const {
  return 1.0 - loss_cdf(tau, x, gx, loss);
}

TabularData generate_synthetic(const SyntheticSpec& spec) {
  SyntheticOracle oracle(spec);
  Rng rng(derive_seed(spec.seed, "synthetic"));

  TabularData data;
  data.features = Matrix(spec.n, spec.dim);
  data.target.resize(spec.n);
  for (std::size_t j = 0; j < spec.dim; ++j) {
    data.column_names.push_back("x" + std::to_string(j + 1));
  }

  boost::math::normal_distribution<double> n01;
  const bool per_coord = spec.design_params.size() == 2 * spec.dim;
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = 0; j < spec.dim; ++j) {
      double a = spec.design_params[per_coord ? 2 * j : 0];
      double b = spec.design_params[per_coord ? 2 * j + 1 : 1];
      double u = rng.uniform01();
      if (spec.design == "uniform") {
        data.features.at(i, j) = a + u * (b - a);
      } else {
        data.features.at(i, j) = a + b * boost::math::quantile(n01, u);
      }
    }
    auto x = data.features.row(i);
    double s = oracle.scale(x);
    if (!(s > 0.0)) {
      throw ValidationError("synthetic: nonpositive sigma(x) at sample " +
                            std::to_string(i));
    }
    double eps = oracle.noise_quantile(rng.uniform01());
    data.target[i] = oracle.mean(x) + s * eps;
  }
  return data;
}

}  // namespace locus
