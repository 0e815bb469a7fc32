#include "eq2pc/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <openssl/evp.h>

namespace eq2pc {

Structure::Structure(IntArray cells, int phases) : cells_(std::move(cells)), phases_(phases) {
  if (phases_ < 1) throw PhaseError("a structure needs at least one phase");
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i] < 1 || cells_[i] > phases_)
      throw PhaseError("cell " + std::to_string(i) + " holds phase " + std::to_string(cells_[i]) +
                       " outside 1.." + std::to_string(phases_));
}

Structure::Structure(Shape dims, int phases, std::vector<std::int64_t> cells)
    : Structure(IntArray(std::move(dims), std::move(cells)), phases) {}

namespace {

void require_phase(const Structure& s, int phase) {
  if (phase < 1 || phase > s.phases())
    throw PhaseError("phase " + std::to_string(phase) + " outside 1.." + std::to_string(s.phases()));
}

void append_i64(std::string& out, std::int64_t v) {
  auto u = static_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

IntArray indicator(const Structure& s, int phase) {
  require_phase(s, phase);
  IntArray out(s.dims());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] == phase ? 1 : 0;
  return out;
}

std::vector<IntArray> indicators(const Structure& s) {
  std::vector<IntArray> out(static_cast<std::size_t>(s.phases()), IntArray(s.dims()));
  for (std::size_t i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(s[i] - 1)][i] = 1;
  return out;
}

std::vector<std::int64_t> phase_counts(const Structure& s) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(s.phases()), 0);
  for (std::size_t i = 0; i < s.size(); ++i) ++out[static_cast<std::size_t>(s[i] - 1)];
  return out;
}

IntArray two_point(const Structure& s, int a1, int a2) {
  require_phase(s, a1);
  require_phase(s, a2);
  return circ_correlate(indicator(s, a1), indicator(s, a2));
}

CorrelationSet::CorrelationSet(Shape dims, int phases, std::map<PhasePair, IntArray> entries)
    : dims_(std::move(dims)), phases_(phases), entries_(std::move(entries)) {
  for (const auto& [pair, c] : entries_) {
    if (pair.first < 1 || pair.first > pair.second || pair.second > phases_ - 1)
      throw PhaseError("pair (" + std::to_string(pair.first) + "," + std::to_string(pair.second) +
                       ") is not an independent correlation");
    if (c.dims() != dims_) throw DimensionError("correlation dims do not match the set");
  }
}

std::string CorrelationSet::bytes() const {
  std::string out;
  append_i64(out, static_cast<std::int64_t>(dims_.size()));
  for (auto P : dims_) append_i64(out, static_cast<std::int64_t>(P));
  append_i64(out, phases_);
  for (const auto& [pair, c] : entries_) {
    append_i64(out, pair.first);
    append_i64(out, pair.second);
    for (auto v : c.values()) append_i64(out, v);
  }
  return out;
}

std::string CorrelationSet::fingerprint() const { return sha256_hex(bytes()); }

CorrelationSet independent_set(const Structure& s) {
  const int n = s.phases();
  std::vector<IntArray> ind;
  for (int a = 1; a < n; ++a) ind.push_back(indicator(s, a));
  std::map<PhasePair, IntArray> entries;
  for (int a1 = 1; a1 < n; ++a1) {
    Correlator right(ind[static_cast<std::size_t>(a1 - 1)]);
    for (int a2 = a1; a2 < n; ++a2) {
      // C_{a1 a2} = I_{a1} (*) I_{a2}; the correlator caches the right operand,
      // so evaluate C_{a2 a1} and negate indices.
      entries.emplace(PhasePair{a1, a2}, negate_indices(right(ind[static_cast<std::size_t>(a2 - 1)])));
    }
  }
  return CorrelationSet(s.dims(), n, std::move(entries));
}

CorrelationTable all_two_point(const Structure& s) {
  const int n = s.phases();
  const auto ind = indicators(s);
  std::vector<IntArray> entries;
  entries.reserve(static_cast<std::size_t>(n * n));
  for (int a1 = 0; a1 < n; ++a1)
    for (int a2 = 0; a2 < n; ++a2)
      entries.push_back(circ_correlate(ind[static_cast<std::size_t>(a1)], ind[static_cast<std::size_t>(a2)]));
  return CorrelationTable(n, std::move(entries));
}

CorrelationTable complete_correlations(const CorrelationSet& cs) {
  const int n = cs.phases();
  const Shape& dims = cs.dims();
  std::vector<IntArray> entries(static_cast<std::size_t>(n * n), IntArray(dims));
  CorrelationTable table(n, std::move(entries));
  if (n == 1) {
    table(1, 1) = IntArray(dims, static_cast<std::int64_t>(element_count(dims)));
    return table;
  }
  for (int a1 = 1; a1 < n; ++a1) {
    for (int a2 = a1; a2 < n; ++a2) {
      table(a1, a2) = cs.at(a1, a2);
      if (a1 != a2) table(a2, a1) = negate_indices(cs.at(a1, a2));
    }
  }
  // C_{a n} = C_{a a, 0} * 1 - sum_{b < n} C_{a b}
  for (int a = 1; a < n; ++a) {
    IntArray last(dims, table(a, a)[0]);
    for (int b = 1; b < n; ++b) last = last - table(a, b);
    table(a, n) = last;
    table(n, a) = negate_indices(last);
  }
  // #n from the partition of the unit cell, then the same relation for row n.
  std::int64_t others = 0;
  for (int a = 1; a < n; ++a) others += table(a, a)[0];
  IntArray last(dims, static_cast<std::int64_t>(element_count(dims)) - others);
  for (int b = 1; b < n; ++b) last = last - table(n, b);
  table(n, n) = last;

  for (int a1 = 1; a1 <= n; ++a1)
    for (int a2 = 1; a2 <= n; ++a2)
      for (auto v : table(a1, a2).values())
        if (v < 0)
          throw InconsistentCorrelations("completed correlation C_" + std::to_string(a1) + std::to_string(a2) +
                                         " has a negative entry");
  return table;
}

bool equivalent(const Structure& a, const Structure& b) {
  if (a.dims() != b.dims() || a.phases() != b.phases()) return false;
  if (phase_counts(a) != phase_counts(b)) return false;
  return independent_set(a) == independent_set(b);
}

MpcSpec::MpcSpec(std::vector<int> phases) : phases_(std::move(phases)) {
  if (phases_.size() < 2) throw std::invalid_argument("an M-point correlation needs M >= 2");
  for (int a : phases_)
    if (a < 1) throw PhaseError("phase indices are 1-based");
}

namespace {

void require_spec(const Structure& s, const MpcSpec& spec) {
  for (int a : spec.phases()) require_phase(s, a);
}

/// I_{a1} (.) I_{a2}(. + p_1) (.) ... for the leading shifts.
IntArray leading_product(const Structure& s, const MpcSpec& spec, std::span<const std::size_t> shifts,
                         const std::vector<IntArray>& ind) {
  const auto& ph = spec.phases();
  IntArray product = ind[static_cast<std::size_t>(ph[0] - 1)];
  std::vector<std::size_t> shift(s.rank());
  std::vector<Index> signed_shift(s.rank());
  for (std::size_t j = 0; j < shifts.size(); ++j) {
    unravel(shifts[j], s.dims(), shift);
    std::copy(shift.begin(), shift.end(), signed_shift.begin());
    product = hadamard(product, shifted(ind[static_cast<std::size_t>(ph[j + 1] - 1)], signed_shift));
  }
  return product;
}

}  // namespace

IntArray mpc_slice(const Structure& s, const MpcSpec& spec, std::span<const std::size_t> leading_shifts) {
  require_spec(s, spec);
  if (leading_shifts.size() != spec.order() - 2)
    throw std::invalid_argument("an M-point slice takes M - 2 leading shifts");
  const auto ind = indicators(s);
  return circ_correlate(leading_product(s, spec, leading_shifts, ind),
                        ind[static_cast<std::size_t>(spec.phases().back() - 1)]);
}

IntArray mpc(const Structure& s, const MpcSpec& spec, std::size_t budget) {
  require_spec(s, spec);
  const std::size_t N = s.size();
  const std::size_t M = spec.order();
  long double total = 1;
  for (std::size_t j = 0; j + 1 < M; ++j) total *= static_cast<long double>(N);
  if (total > static_cast<long double>(budget))
    throw BudgetExceeded("M-point correlation with " + std::to_string(static_cast<double>(total)) +
                         " entries exceeds the budget of " + std::to_string(budget) + "; use mpc_deviation");
  Shape dims;
  for (std::size_t j = 0; j + 1 < M; ++j) dims.insert(dims.end(), s.dims().begin(), s.dims().end());
  IntArray out(dims);
  const auto ind = indicators(s);
  const Correlator last(ind[static_cast<std::size_t>(spec.phases().back() - 1)]);
  std::vector<std::size_t> shifts(M - 2, 0);
  const std::size_t slices = out.size() / N;
  for (std::size_t k = 0; k < slices; ++k) {
    std::size_t rest = k;
    for (std::size_t j = shifts.size(); j-- > 0;) {
      shifts[j] = rest % N;
      rest /= N;
    }
    const IntArray slice = last(leading_product(s, spec, shifts, ind));
    std::copy(slice.values().begin(), slice.values().end(), out.data().begin() + static_cast<Index>(k * N));
  }
  return out;
}

MpcDeviation mpc_deviation(const Structure& a, const Structure& b, const MpcSpec& spec) {
  if (a.dims() != b.dims()) throw DimensionError("M-point deviation needs equal dims");
  require_spec(a, spec);
  require_spec(b, spec);
  const std::size_t N = a.size();
  const std::size_t M = spec.order();
  std::size_t slices = 1;
  for (std::size_t j = 0; j + 2 < M; ++j) slices *= N;

  const auto ind_a = indicators(a);
  const auto ind_b = indicators(b);
  const auto last_phase = static_cast<std::size_t>(spec.phases().back() - 1);

  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(std::min<std::size_t>(slices, 64))));
  std::vector<MpcDeviation> partial(workers);
  auto work = [&](unsigned w) {
    const Correlator last_a(ind_a[last_phase]);
    const Correlator last_b(ind_b[last_phase]);
    std::vector<std::size_t> shifts(M - 2, 0);
    long double first = 0, diff = 0;
    for (std::size_t k = w; k < slices; k += workers) {
      std::size_t rest = k;
      for (std::size_t j = shifts.size(); j-- > 0;) {
        shifts[j] = rest % N;
        rest /= N;
      }
      const IntArray ca = last_a(leading_product(a, spec, shifts, ind_a));
      const IntArray cb = last_b(leading_product(b, spec, shifts, ind_b));
      for (std::size_t i = 0; i < N; ++i) {
        const auto x = static_cast<long double>(ca[i]);
        const auto d = static_cast<long double>(ca[i] - cb[i]);
        first += x * x;
        diff += d * d;
      }
    }
    partial[w].norm_first = first;
    partial[w].norm_difference = diff;
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();

  MpcDeviation out;
  for (const auto& p : partial) {
    out.norm_first += p.norm_first;
    out.norm_difference += p.norm_difference;
  }
  out.norm_first = std::sqrt(out.norm_first);
  out.norm_difference = std::sqrt(out.norm_difference);
  return out;
}

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

std::vector<Rational> volume_fractions(const Structure& s) {
  std::vector<Rational> out;
  const auto total = static_cast<std::int64_t>(s.size());
  for (auto c : phase_counts(s)) out.push_back(make_rational(c, total));
  return out;
}

}  // namespace eq2pc
