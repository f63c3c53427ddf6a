#include "cvtomo/assemble.hpp"

#include <cmath>
#include <numbers>

namespace cvtomo {

Vector vectorize(const Matrix& rho) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("vectorize: matrix must be square");
  // Eigen stores column-major, so the column-stacked order is a straight copy.
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvectorize(const Vector& v) {
  const int n = static_cast<int>(std::llround(std::sqrt(double(v.size()))));
  if (static_cast<long>(n) * n != v.size())
    throw std::invalid_argument("unvectorize: length is not a perfect square");
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

std::vector<Matrix> basis_ops(FockDim dim) {
  const int n = dim.n;
  std::vector<Matrix> ops;
  ops.reserve(static_cast<std::size_t>(n) * n);
  for (int c = 0; c < n * n; ++c) {
    Matrix omega = Matrix::Zero(n, n);
    omega(c % n, c / n) = 1.0;  // |i><j| with i = c%N, j = c/N
    ops.push_back(std::move(omega));
  }
  return ops;
}

DesignMatrix build_design_matrix(const PovmSet& povms) {
  if (povms.operators.empty())
    throw std::invalid_argument("build_design_matrix: empty PovmSet");
  const int n = povms.dim.n;
  const int m = povms.outcomes();
  const double row_scale =
      povms.scheme == Scheme::wigner ? 2.0 / std::numbers::pi : 1.0;

  DesignMatrix a{Matrix(m, n * n), povms.dim, povms.scheme, povms.settings};
  for (int k = 0; k < m; ++k) {
    const Matrix& pi = povms.operators[k];
    if (pi.rows() != n || pi.cols() != n)
      throw std::invalid_argument("build_design_matrix: dimension mismatch");
    // Tr[Pi |i><j|] = <j|Pi|i>; column c encodes (i, j) = (c%N, c/N).
    for (int c = 0; c < n * n; ++c)
      a.entries(k, c) = row_scale * pi(c / n, c % n);
  }
  return a;
}

std::string normalization_name(Normalization n) {
  switch (n) {
    case Normalization::probabilities: return "probabilities";
    case Normalization::densities: return "densities";
    case Normalization::wigner_values: return "wigner-values";
  }
  throw std::logic_error("normalization_name: bad enum");
}

Normalization normalization_from_name(const std::string& name) {
  if (name == "probabilities") return Normalization::probabilities;
  if (name == "densities") return Normalization::densities;
  if (name == "wigner-values") return Normalization::wigner_values;
  throw std::invalid_argument("unknown normalization: " + name);
}

namespace {

void check_probability_sums(const RealVector& values, const PovmSet& povms) {
  // For grid schemes the whole outcome set is one probability space; for
  // homodyne each angle is.
  int groups = 1;
  if (povms.scheme == Scheme::homodyne)
    groups = static_cast<int>(
        std::get<HomodyneSettings>(povms.settings).angles.size());
  const int per = static_cast<int>(values.size()) / groups;
  for (int g = 0; g < groups; ++g) {
    const double sum = values.segment(g * per, per).sum();
    if (sum > 1.0 + 1e-6)
      throw std::invalid_argument(
          "MeasurementVector: probabilities sum beyond 1");
  }
}

}  // namespace

MeasurementVector build_measurement_vector(const RealVector& values,
                                           Normalization tag,
                                           const PovmSet& povms) {
  if (values.size() != povms.outcomes())
    throw std::invalid_argument(
        "build_measurement_vector: length does not match outcome count");
  if (!values.allFinite())
    throw std::invalid_argument("build_measurement_vector: non-finite value");
  if (tag == Normalization::probabilities) {
    if (values.minCoeff() < 0.0)
      throw std::invalid_argument(
          "build_measurement_vector: negative probability");
    check_probability_sums(values, povms);
  }
  return MeasurementVector{values, tag, 0};
}

MeasurementVector build_measurement_vector(const std::vector<long>& counts,
                                           const PovmSet& povms,
                                           long total_samples) {
  if (static_cast<int>(counts.size()) != povms.outcomes())
    throw std::invalid_argument(
        "build_measurement_vector: histogram does not match outcome count");
  long sum = 0;
  for (long c : counts) {
    if (c < 0)
      throw std::invalid_argument("build_measurement_vector: negative count");
    sum += c;
  }
  if (sum == 0)
    throw std::invalid_argument("build_measurement_vector: no samples");
  const long total = total_samples > 0 ? total_samples : sum;
  RealVector values(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    values(static_cast<int>(i)) = static_cast<double>(counts[i]) / total;
  return MeasurementVector{std::move(values), Normalization::probabilities,
                           total};
}

MeasurementVector build_measurement_vector(
    const std::vector<std::vector<long>>& per_angle_counts,
    const PovmSet& povms) {
  if (povms.scheme != Scheme::homodyne)
    throw std::invalid_argument(
        "build_measurement_vector: per-angle histograms need a homodyne set");
  const auto& settings = std::get<HomodyneSettings>(povms.settings);
  if (per_angle_counts.size() != settings.angles.size())
    throw std::invalid_argument(
        "build_measurement_vector: angle count mismatch");
  const int bins = settings.n_bins();
  RealVector values(povms.outcomes());
  long total = 0;
  for (std::size_t a = 0; a < per_angle_counts.size(); ++a) {
    const auto& hist = per_angle_counts[a];
    if (static_cast<int>(hist.size()) != bins)
      throw std::invalid_argument("build_measurement_vector: bin mismatch");
    long sum = 0;
    for (long c : hist) {
      if (c < 0)
        throw std::invalid_argument(
            "build_measurement_vector: negative count");
      sum += c;
    }
    if (sum == 0)
      throw std::invalid_argument(
          "build_measurement_vector: angle with no samples");
    for (int j = 0; j < bins; ++j)
      values(static_cast<int>(a) * bins + j) =
          static_cast<double>(hist[j]) / sum;
    total += sum;
  }
  return MeasurementVector{std::move(values), Normalization::probabilities,
                           total};
}

}  // namespace cvtomo
