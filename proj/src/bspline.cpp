#include "splinelab/bspline.hpp"

#include <algorithm>
#include <array>
#include <functional>

#include "splinelab/error.hpp"

namespace splinelab {

std::size_t eval_basis_into(const KnotVector& kv, double x, std::span<double> out) {
  const auto k = static_cast<std::size_t>(kv.order());
  if (out.size() < k) throw Error(ErrorCode::DimensionMismatch, "output span shorter than k");
  const std::size_t s = kv.span(x);  // throws OutOfDomain
  const auto t = kv.knots();

  // left[j] = x - t_{s+1-j}, right[j] = t_{s+j} - x; the span is nonempty so
  // every denominator below covers it and is strictly positive.
  std::array<double, 32> left_buf{};
  std::array<double, 32> right_buf{};
  std::vector<double> left_heap;
  std::vector<double> right_heap;
  double* left = left_buf.data();
  double* right = right_buf.data();
  if (k + 1 > left_buf.size()) {
    left_heap.assign(k + 1, 0.0);
    right_heap.assign(k + 1, 0.0);
    left = left_heap.data();
    right = right_heap.data();
  }

  out[0] = 1.0;
  for (std::size_t j = 1; j < k; ++j) {
    left[j] = x - t[s + 1 - j];
    right[j] = t[s + j] - x;
    double saved = 0.0;
    for (std::size_t r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom > 0.0 ? out[r] / denom : 0.0;
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
  for (std::size_t r = 0; r < k; ++r) out[r] = std::max(out[r], 0.0);
  return s + 1 - k;
}

BasisValues eval_basis(const KnotVector& kv, double x) {
  BasisValues b;
  b.values.resize(static_cast<std::size_t>(kv.order()));
  b.first = eval_basis_into(kv, x, b.values);
  return b;
}

double eval_spline(const SplineCoeffs& s, double x) {
  if (s.coeffs.size() != s.kv.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient count differs from basis size");
  }
  const BasisValues b = eval_basis(s.kv, x);
  double sum = 0.0;
  for (std::size_t r = 0; r < b.values.size(); ++r) sum += s.coeffs[b.first + r] * b.values[r];
  return sum;
}

TensorCoeffs::TensorCoeffs(TensorMesh mesh, std::vector<double> data)
    : mesh_(std::move(mesh)), data_(std::move(data)) {
  std::size_t total = 1;
  for (std::size_t n : mesh_.shape()) total *= n;
  if (total != data_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient array does not match mesh shape");
  }
}

double eval_tensor(const TensorCoeffs& tc, std::span<const double> point) {
  const TensorMesh& mesh = tc.mesh();
  const std::size_t d = mesh.dim();
  if (point.size() != d) throw Error(ErrorCode::DimensionMismatch, "point dimension mismatch");

  const auto shape = mesh.shape();
  std::vector<BasisValues> basis(d);
  for (std::size_t mu = 0; mu < d; ++mu) basis[mu] = eval_basis(mesh.axis(mu), point[mu]);

  // strides of the full coefficient array
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t mu = d - 1; mu > 0; --mu) stride[mu - 1] = stride[mu] * shape[mu];

  // Recursive contraction: the innermost (last) axis is summed first.
  const auto data = tc.data();
  std::function<double(std::size_t, std::size_t)> contract = [&](std::size_t mu,
                                                                 std::size_t offset) {
    const BasisValues& b = basis[mu];
    double sum = 0.0;
    for (std::size_t r = 0; r < b.values.size(); ++r) {
      const std::size_t idx = offset + (b.first + r) * stride[mu];
      sum += b.values[r] * (mu + 1 == d ? data[idx] : contract(mu + 1, idx));
    }
    return sum;
  };
  return contract(0, 0);
}

nlohmann::json coeffs_to_json(const TensorCoeffs& tc) {
  const auto shape = tc.shape();
  const auto data = tc.data();
  std::function<nlohmann::json(std::size_t, std::size_t)> build = [&](std::size_t mu,
                                                                     std::size_t offset) {
    nlohmann::json arr = nlohmann::json::array();
    std::size_t stride = 1;
    for (std::size_t nu = mu + 1; nu < shape.size(); ++nu) stride *= shape[nu];
    for (std::size_t i = 0; i < shape[mu]; ++i) {
      if (mu + 1 == shape.size()) {
        arr.push_back(data[offset + i]);
      } else {
        arr.push_back(build(mu + 1, offset + i * stride));
      }
    }
    return arr;
  };
  return build(0, 0);
}

}  // namespace splinelab
