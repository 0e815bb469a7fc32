#include "eq2pc/periodic_array.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace eq2pc {

std::string to_string(const Shape& dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t d = 0; d < dims.size(); ++d) os << (d ? "," : "") << dims[d];
  os << ')';
  return os.str();
}

std::vector<std::size_t> mod_index(std::span<const Index> p, const Shape& dims) {
  if (p.size() != dims.size())
    throw DimensionError("index tuple of length " + std::to_string(p.size()) + " for dims " + to_string(dims));
  std::vector<std::size_t> out(p.size());
  for (std::size_t d = 0; d < p.size(); ++d) out[d] = mod_index(p[d], dims[d]);
  return out;
}

Shape scaled_shape(const Shape& dims, const Factors& z) {
  Shape out = dims;
  for (std::size_t r = 0; r < z.size(); ++r) {
    if (r < dims.size())
      out[r] = dims[r] * z[r];
    else
      out.push_back(z[r]);
  }
  return out;
}

Shape strides_of(const Shape& dims) {
  Shape s(dims.size(), 1);
  for (std::size_t d = dims.size(); d-- > 1;) s[d - 1] = s[d] * dims[d];
  return s;
}

ComplexArray conj(const ComplexArray& a) {
  ComplexArray out = a;
  for (auto& v : out.data()) v = std::conj(v);
  return out;
}

double max_abs_difference(const ComplexArray& a, const ComplexArray& b) {
  detail::require_same_dims(a.dims(), b.dims(), "max_abs_difference");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace {

// One 1-D transform per line along every axis.
ComplexArray transform(const ComplexArray& a, bool inverse) {
  thread_local Eigen::FFT<double> fft;
  ComplexArray out = a;
  const Shape& dims = a.dims();
  const Shape strides = strides_of(dims);
  std::vector<Complex> line, result;
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    const std::size_t len = dims[axis];
    if (len == 1) continue;
    const std::size_t stride = strides[axis];
    const std::size_t block = stride * len;
    line.resize(len);
    for (std::size_t outer = 0; outer < out.size(); outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer + inner;
        for (std::size_t k = 0; k < len; ++k) line[k] = out[base + k * stride];
        if (inverse)
          fft.inv(result, line);
        else
          fft.fwd(result, line);
        for (std::size_t k = 0; k < len; ++k) out[base + k * stride] = result[k];
      }
    }
  }
  return out;
}

}  // namespace

ComplexArray dft(const ComplexArray& a) { return transform(a, false); }

ComplexArray idft(const ComplexArray& a) { return transform(a, true); }

IntArray round_to_integers(const ComplexArray& a, double max_residual) {
  IntArray out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double re = a[i].real();
    const double rounded = std::nearbyint(re);
    if (std::abs(re - rounded) >= max_residual || std::abs(a[i].imag()) >= max_residual)
      throw std::domain_error("array entry " + std::to_string(i) + " is not numerically integer");
    out[i] = static_cast<std::int64_t>(rounded);
  }
  return out;
}

namespace detail {

ComplexArray convolve_spectral(const ComplexArray& a, const ComplexArray& b) {
  ComplexArray fa = dft(a);
  const ComplexArray fb = dft(b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  return idft(fa);
}

ComplexArray correlate_spectral(const ComplexArray& a, const ComplexArray& b) {
  ComplexArray fa = conj(dft(conj(a)));
  const ComplexArray fb = dft(b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  return idft(fa);
}

}  // namespace detail

Correlator::Correlator(const IntArray& right)
    : right_(right), spectrum_(right.dims()), spectral_(right.size() <= kExactFftLimit) {
  if (spectral_) spectrum_ = dft(right);
}

IntArray Correlator::operator()(const IntArray& left) const {
  detail::require_same_dims(left.dims(), right_.dims(), "Correlator");
  const double bound = detail::l1_norm(left) * max_abs(right_);
  if (spectral_ && bound < 0x1p40) {
    ComplexArray fl = dft(left);
    for (std::size_t i = 0; i < fl.size(); ++i) fl[i] = std::conj(fl[i]) * spectrum_[i];
    try {
      return round_to_integers(idft(fl));
    } catch (const std::domain_error&) {
    }
  }
  return detail::direct_sum<std::int64_t, std::int64_t, std::int64_t, true>(left, right_);
}

}  // namespace eq2pc
