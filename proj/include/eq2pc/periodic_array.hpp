#ifndef EQ2PC_PERIODIC_ARRAY_HPP
#define EQ2PC_PERIODIC_ARRAY_HPP

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace eq2pc {

using Index = std::ptrdiff_t;
using Complex = std::complex<double>;

/// Period vector P of a D-dimensional array, axis 0 first (row-major).
using Shape = std::vector<std::size_t>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Product of all periods.
inline std::size_t element_count(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

std::string to_string(const Shape& dims);

/// Positive remainder of p on division by period, e.g. mod_index(-2, 5) == 3.
inline std::size_t mod_index(Index p, std::size_t period) {
  const auto P = static_cast<Index>(period);
  const Index r = p % P;
  return static_cast<std::size_t>(r < 0 ? r + P : r);
}

/// Component-wise modulo reduction of an index tuple.
std::vector<std::size_t> mod_index(std::span<const Index> p, const Shape& dims);

/// Embedding / repetition factor vector z. N >= 1, every entry >= 1.
class Factors {
 public:
  Factors() = default;
  Factors(std::initializer_list<std::size_t> z) : Factors(std::vector<std::size_t>(z)) {}
  explicit Factors(std::vector<std::size_t> z) : z_(std::move(z)) {
    if (z_.empty()) throw DimensionError("factor vector must have at least one entry");
    for (auto v : z_)
      if (v == 0) throw DimensionError("factor entries must be positive");
  }

  std::size_t size() const { return z_.size(); }
  std::size_t operator[](std::size_t i) const { return z_[i]; }
  const std::vector<std::size_t>& entries() const { return z_; }
  bool all_ones() const {
    return std::all_of(z_.begin(), z_.end(), [](auto v) { return v == 1; });
  }
  bool operator==(const Factors&) const = default;

 private:
  std::vector<std::size_t> z_;
};

/// Dims of the trivial embedding / repetition of an array of `dims` by `z`.
Shape scaled_shape(const Shape& dims, const Factors& z);

/// Row-major strides for dims.
Shape strides_of(const Shape& dims);

/// Writes the multi-index of a flat row-major offset into `out`.
inline void unravel(std::size_t flat, const Shape& dims, std::span<std::size_t> out) {
  for (std::size_t d = dims.size(); d-- > 0;) {
    out[d] = flat % dims[d];
    flat /= dims[d];
  }
}

/// One unit cell of a P-periodic field. Values of any integer tuple are
/// reachable through component-wise modulo reduction.
template <typename Scalar>
class PeriodicArray {
 public:
  using value_type = Scalar;

  PeriodicArray() : dims_{1}, data_(1) {}

  explicit PeriodicArray(Shape dims, Scalar fill = Scalar{}) : dims_(std::move(dims)) {
    validate_dims();
    data_.assign(element_count(dims_), fill);
  }

  PeriodicArray(Shape dims, std::vector<Scalar> data) : dims_(std::move(dims)), data_(std::move(data)) {
    validate_dims();
    if (data_.size() != element_count(dims_))
      throw DimensionError("element count " + std::to_string(data_.size()) + " does not match dims " +
                           to_string(dims_));
  }

  const Shape& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<const Scalar> data() const { return data_; }
  std::span<Scalar> data() { return data_; }
  const std::vector<Scalar>& values() const { return data_; }

  Scalar& operator[](std::size_t flat) { return data_[flat]; }
  const Scalar& operator[](std::size_t flat) const { return data_[flat]; }

  /// Flat offset of an arbitrary (possibly negative / out of range) index tuple.
  std::size_t offset(std::span<const Index> p) const {
    if (p.size() != dims_.size()) throw DimensionError("index rank does not match array rank");
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) flat = flat * dims_[d] + mod_index(p[d], dims_[d]);
    return flat;
  }

  std::size_t offset(std::span<const std::size_t> p) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) flat = flat * dims_[d] + p[d] % dims_[d];
    return flat;
  }

  const Scalar& at(std::span<const Index> p) const { return data_[offset(p)]; }
  Scalar& at(std::span<const Index> p) { return data_[offset(p)]; }
  const Scalar& at(std::initializer_list<Index> p) const {
    return at(std::span<const Index>(p.begin(), p.size()));
  }
  Scalar& at(std::initializer_list<Index> p) { return at(std::span<const Index>(p.begin(), p.size())); }

  template <typename Other>
  PeriodicArray<Other> cast() const {
    std::vector<Other> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](const Scalar& v) { return static_cast<Other>(v); });
    return PeriodicArray<Other>(dims_, std::move(out));
  }

  bool operator==(const PeriodicArray&) const = default;

 private:
  void validate_dims() const {
    if (dims_.empty()) throw DimensionError("array must have at least one axis");
    for (auto P : dims_)
      if (P == 0) throw DimensionError("periods must be positive");
  }

  Shape dims_;
  std::vector<Scalar> data_;
};

using IntArray = PeriodicArray<std::int64_t>;
using RealArray = PeriodicArray<double>;
using ComplexArray = PeriodicArray<Complex>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

/// integer -> real -> complex promotion of mixed-domain operands.
template <typename A, typename B>
struct promote {
  using type = std::conditional_t<
      is_complex<A>::value || is_complex<B>::value, Complex,
      std::conditional_t<std::is_floating_point_v<A> || std::is_floating_point_v<B>, double, std::int64_t>>;
};
template <typename A, typename B>
using promote_t = typename promote<A, B>::type;

template <typename Scalar>
ComplexArray to_complex(const PeriodicArray<Scalar>& a) {
  std::vector<Complex> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (is_complex<Scalar>::value)
      out[i] = a[i];
    else
      out[i] = Complex(static_cast<double>(a[i]), 0.0);
  }
  return ComplexArray(a.dims(), std::move(out));
}

// Embedding and repetition ---------------------------------------------------

/// Trivial embedding A^{z}: values of A at stride positions z_r q_r, zero
/// elsewhere. For N > D the appended axes carry A only at index 0.
template <typename Scalar>
PeriodicArray<Scalar> trivial_embed(const PeriodicArray<Scalar>& a, const Factors& z) {
  const Shape& in = a.dims();
  PeriodicArray<Scalar> out(scaled_shape(in, z));
  const Shape out_strides = strides_of(out.dims());
  const std::size_t scaled = std::min(z.size(), in.size());
  std::vector<std::size_t> q(in.size());
  for (std::size_t flat = 0; flat < a.size(); ++flat) {
    unravel(flat, in, q);
    std::size_t target = 0;
    for (std::size_t d = 0; d < in.size(); ++d) target += (d < scaled ? z[d] * q[d] : q[d]) * out_strides[d];
    out[target] = a[flat];
  }
  return out;
}

/// Repetition A^{[z]}: periodic tiling; constant along appended axes.
template <typename Scalar>
PeriodicArray<Scalar> repeat(const PeriodicArray<Scalar>& a, const Factors& z) {
  const Shape& in = a.dims();
  PeriodicArray<Scalar> out(scaled_shape(in, z));
  std::vector<std::size_t> p(out.rank());
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    unravel(flat, out.dims(), p);
    std::size_t source = 0;
    for (std::size_t d = 0; d < in.size(); ++d) source = source * in[d] + p[d] % in[d];
    out[flat] = a[source];
  }
  return out;
}

/// Cyclic shift: result_p = a_{p + shift}.
template <typename Scalar>
PeriodicArray<Scalar> shifted(const PeriodicArray<Scalar>& a, std::span<const Index> shift) {
  if (shift.size() != a.rank()) throw DimensionError("shift rank does not match array rank");
  PeriodicArray<Scalar> out(a.dims());
  std::vector<std::size_t> p(a.rank());
  std::vector<Index> q(a.rank());
  for (std::size_t flat = 0; flat < a.size(); ++flat) {
    unravel(flat, a.dims(), p);
    for (std::size_t d = 0; d < p.size(); ++d) q[d] = static_cast<Index>(p[d]) + shift[d];
    out[flat] = a.at(q);
  }
  return out;
}

/// Index negation: result_p = a_{-p}.
template <typename Scalar>
PeriodicArray<Scalar> negate_indices(const PeriodicArray<Scalar>& a) {
  PeriodicArray<Scalar> out(a.dims());
  std::vector<std::size_t> p(a.rank());
  for (std::size_t flat = 0; flat < a.size(); ++flat) {
    unravel(flat, a.dims(), p);
    for (std::size_t d = 0; d < p.size(); ++d) p[d] = (a.dims()[d] - p[d]) % a.dims()[d];
    out[flat] = a[a.offset(std::span<const std::size_t>(p))];
  }
  return out;
}

// Element-wise algebra -------------------------------------------------------

namespace detail {
inline void require_same_dims(const Shape& a, const Shape& b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": dims " + to_string(a) + " and " + to_string(b) + " differ");
}
}  // namespace detail

template <typename A, typename B>
PeriodicArray<promote_t<A, B>> hadamard(const PeriodicArray<A>& a, const PeriodicArray<B>& b) {
  using R = promote_t<A, B>;
  detail::require_same_dims(a.dims(), b.dims(), "hadamard");
  PeriodicArray<R> out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<R>(a[i]) * static_cast<R>(b[i]);
  return out;
}

template <typename Scalar>
PeriodicArray<Scalar> operator+(const PeriodicArray<Scalar>& a, const PeriodicArray<Scalar>& b) {
  detail::require_same_dims(a.dims(), b.dims(), "sum");
  PeriodicArray<Scalar> out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

template <typename Scalar>
PeriodicArray<Scalar> operator-(const PeriodicArray<Scalar>& a, const PeriodicArray<Scalar>& b) {
  detail::require_same_dims(a.dims(), b.dims(), "difference");
  PeriodicArray<Scalar> out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

ComplexArray conj(const ComplexArray& a);

template <typename Scalar>
double max_abs(const PeriodicArray<Scalar>& a) {
  double m = 0.0;
  for (const auto& v : a.values()) m = std::max(m, static_cast<double>(std::abs(v)));
  return m;
}

/// max |a - b| over all entries.
double max_abs_difference(const ComplexArray& a, const ComplexArray& b);

// DFT ------------------------------------------------------------------------

/// Unnormalized forward DFT with exp(-i 2 pi sum p_d q_d / P_d).
ComplexArray dft(const ComplexArray& a);

/// Inverse DFT with exp(+i ...) and the 1 / (P_1 ... P_D) factor.
ComplexArray idft(const ComplexArray& a);

template <typename Scalar>
ComplexArray dft(const PeriodicArray<Scalar>& a) {
  return dft(to_complex(a));
}

/// Rounds a numerically integer-valued array. Throws std::domain_error if
/// an imaginary part or a rounding residual reaches `max_residual`.
IntArray round_to_integers(const ComplexArray& a, double max_residual = 0.5);

// Convolution and correlation ------------------------------------------------

/// Integer results are computed through the FFT and rounded when the product
/// of dims is at most this size; larger inputs use direct summation.
inline constexpr std::size_t kExactFftLimit = std::size_t{1} << 20;

namespace detail {

ComplexArray convolve_spectral(const ComplexArray& a, const ComplexArray& b);
ComplexArray correlate_spectral(const ComplexArray& a, const ComplexArray& b);

template <typename R, typename A, typename B, bool Correlate>
PeriodicArray<R> direct_sum(const PeriodicArray<A>& a, const PeriodicArray<B>& b) {
  const Shape& dims = a.dims();
  PeriodicArray<R> out(dims);
  std::vector<std::size_t> p(dims.size()), q(dims.size()), r(dims.size());
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != A{}) nonzero.push_back(i);
  for (std::size_t pf = 0; pf < out.size(); ++pf) {
    unravel(pf, dims, p);
    R acc{};
    for (std::size_t qf : nonzero) {
      unravel(qf, dims, q);
      for (std::size_t d = 0; d < dims.size(); ++d)
        r[d] = Correlate ? (q[d] + p[d]) % dims[d] : (p[d] + dims[d] - q[d]) % dims[d];
      acc += static_cast<R>(a[qf]) * static_cast<R>(b[b.offset(std::span<const std::size_t>(r))]);
    }
    out[pf] = acc;
  }
  return out;
}

template <typename Scalar>
double l1_norm(const PeriodicArray<Scalar>& a) {
  double s = 0.0;
  for (const auto& v : a.values()) s += static_cast<double>(std::abs(v));
  return s;
}

template <typename A, typename B, bool Correlate>
PeriodicArray<promote_t<A, B>> circular(const PeriodicArray<A>& a, const PeriodicArray<B>& b) {
  using R = promote_t<A, B>;
  detail::require_same_dims(a.dims(), b.dims(), Correlate ? "circ_correlate" : "circ_convolve");
  if constexpr (std::is_integral_v<R>) {
    // The largest attainable |entry| bounds the absolute FFT error.
    const double bound = l1_norm(a) * max_abs(b);
    if (a.size() <= kExactFftLimit && bound < 0x1p40) {
      const auto spectral = Correlate ? correlate_spectral(to_complex(a), to_complex(b))
                                      : convolve_spectral(to_complex(a), to_complex(b));
      try {
        return round_to_integers(spectral);
      } catch (const std::domain_error&) {
        // fall through to direct summation
      }
    }
    return direct_sum<R, A, B, Correlate>(a, b);
  } else {
    const auto spectral = Correlate ? correlate_spectral(to_complex(a), to_complex(b))
                                    : convolve_spectral(to_complex(a), to_complex(b));
    if constexpr (is_complex<R>::value) {
      return spectral;
    } else {
      RealArray out(spectral.dims());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectral[i].real();
      return out;
    }
  }
}

}  // namespace detail

/// (A * B)_p = sum_q A_q B_{p - q}, indices modulo P.
template <typename A, typename B>
PeriodicArray<promote_t<A, B>> circ_convolve(const PeriodicArray<A>& a, const PeriodicArray<B>& b) {
  return detail::circular<A, B, false>(a, b);
}

/// (A (*) B)_p = sum_q A_q B_{q + p}, indices modulo P.
template <typename A, typename B>
PeriodicArray<promote_t<A, B>> circ_correlate(const PeriodicArray<A>& a, const PeriodicArray<B>& b) {
  return detail::circular<A, B, true>(a, b);
}

/// Correlation against a fixed right operand whose spectrum is cached;
/// used when many left operands meet the same right operand.
class Correlator {
 public:
  explicit Correlator(const IntArray& right);
  const Shape& dims() const { return spectrum_.dims(); }
  /// Exact integer correlation left (*) right.
  IntArray operator()(const IntArray& left) const;

 private:
  IntArray right_;
  ComplexArray spectrum_;
  bool spectral_;
};

}  // namespace eq2pc

#endif  // EQ2PC_PERIODIC_ARRAY_HPP
