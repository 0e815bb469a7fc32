#include "eq2pc/niezgoda.hpp"

#include <algorithm>
#include <cmath>

namespace eq2pc {

DftCorrelationMap::DftCorrelationMap(Shape dims, int phases)
    : dims_(std::move(dims)),
      phases_(phases),
      values_(static_cast<std::size_t>(phases * phases), ComplexArray(dims_)),
      known_(static_cast<std::size_t>(phases * phases), KnownMask(dims_, 0)) {
  if (phases < 1) throw PhaseError("a correlation map needs at least one phase");
}

bool DftCorrelationMap::complete() const {
  return std::all_of(known_.begin(), known_.end(), [](const KnownMask& m) {
    return std::all_of(m.values().begin(), m.values().end(), [](unsigned char k) { return k != 0; });
  });
}

DftCorrelationMap dft_correlations(const Structure& s) {
  const int n = s.phases();
  DftCorrelationMap map(s.dims(), n);
  std::vector<ComplexArray> spectra;
  for (const auto& ind : indicators(s)) spectra.push_back(dft(ind));
  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      const auto& fa = spectra[static_cast<std::size_t>(a - 1)];
      const auto& fb = spectra[static_cast<std::size_t>(b - 1)];
      for (std::size_t p = 0; p < fa.size(); ++p) map.set(a, b, p, std::conj(fa[p]) * fb[p]);
    }
  }
  return map;
}

namespace {

/// Flat index of (P - p) mod P.
std::vector<std::size_t> mirror_table(const Shape& dims) {
  const std::size_t N = element_count(dims);
  std::vector<std::size_t> out(N), p(dims.size());
  for (std::size_t f = 0; f < N; ++f) {
    unravel(f, dims, p);
    std::size_t m = 0;
    for (std::size_t d = 0; d < dims.size(); ++d) m = m * dims[d] + (dims[d] - p[d]) % dims[d];
    out[f] = m;
  }
  return out;
}

double phase_count_of(const DftCorrelationMap& map, int a) {
  return std::sqrt(std::max(0.0, map(a, a)[0].real()));
}

class ReportBuilder {
 public:
  explicit ReportBuilder(double tol) : tol_(tol) {}
  void record(const std::string& name, double violation) {
    auto it = std::find_if(report_.checks.begin(), report_.checks.end(),
                           [&](const PropertyCheck& c) { return c.name == name; });
    if (it == report_.checks.end()) {
      report_.checks.push_back({name, 0.0, true});
      it = std::prev(report_.checks.end());
    }
    it->max_violation = std::max(it->max_violation, violation);
    it->passed = it->max_violation <= tol_;
  }
  PropertyReport take() { return std::move(report_); }

 private:
  double tol_;
  PropertyReport report_;
};

void check_into(const DftCorrelationMap& map, ReportBuilder& out) {
  const int n = map.phases();
  const std::size_t N = element_count(map.dims());
  const double scale = static_cast<double>(N) * static_cast<double>(N);
  const auto mirror = mirror_table(map.dims());
  auto known = [&](int a, int b, std::size_t p) { return map.is_known(a, b, p); };
  std::vector<double> counts(static_cast<std::size_t>(n) + 1);
  std::vector<bool> count_known(static_cast<std::size_t>(n) + 1);
  for (int a = 1; a <= n; ++a) {
    counts[static_cast<std::size_t>(a)] = phase_count_of(map, a);
    count_known[static_cast<std::size_t>(a)] = known(a, a, 0);
  }

  for (const char* name : {"dft_symmetry", "conjugate_transpose", "key_product", "row_sum", "inverse_sum",
                           "zero_bound", "magnitude_bound", "tight_bound"})
    out.record(name, 0.0);

  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      const auto& c = map(a, b);
      const bool counts_ok = count_known[static_cast<std::size_t>(a)] && count_known[static_cast<std::size_t>(b)];
      const double ab = counts[static_cast<std::size_t>(a)] * counts[static_cast<std::size_t>(b)];
      for (std::size_t p = 0; p < N; ++p) {
        if (!known(a, b, p)) continue;
        if (known(a, b, mirror[p])) out.record("dft_symmetry", std::abs(c[p] - std::conj(c[mirror[p]])) / scale);
        if (known(b, a, p)) out.record("conjugate_transpose", std::abs(c[p] - std::conj(map(b, a)[p])) / scale);
        out.record("magnitude_bound", std::max(0.0, std::abs(c[p]) - scale) / scale);
        if (counts_ok) out.record("tight_bound", std::max(0.0, std::abs(c[p]) - ab) / scale);
      }
      if (known(a, b, 0)) {
        const Complex z = c[0];
        out.record("zero_bound",
                   std::max({0.0, -z.real(), z.real() - scale, std::abs(z.imag())}) / scale);
        if (counts_ok) out.record("tight_bound", std::abs(z - Complex(ab, 0.0)) / scale);
      }
      // inverse sum: sum_p C^_ab,p = N #a delta_ab
      const auto& mask = map.known(a, b);
      if (std::all_of(mask.values().begin(), mask.values().end(), [](unsigned char k) { return k != 0; }) &&
          count_known[static_cast<std::size_t>(a)]) {
        Complex sum = 0;
        for (std::size_t p = 0; p < N; ++p) sum += c[p];
        const double rhs = a == b ? static_cast<double>(N) * counts[static_cast<std::size_t>(a)] : 0.0;
        out.record("inverse_sum", std::abs(sum - rhs) / scale);
      }
    }
  }
  // key product: C^_ag C^_gb = C^_gg C^_ab
  for (int g = 1; g <= n; ++g)
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b)
        for (std::size_t p = 0; p < N; ++p)
          if (known(a, g, p) && known(g, b, p) && known(g, g, p) && known(a, b, p))
            out.record("key_product",
                       std::abs(map(a, g)[p] * map(g, b)[p] - map(g, g)[p] * map(a, b)[p]) / (scale * scale));
  // row sum: sum_b C^_ab,p = N #a delta_p0
  for (int a = 1; a <= n; ++a) {
    if (!count_known[static_cast<std::size_t>(a)]) continue;
    for (std::size_t p = 0; p < N; ++p) {
      Complex sum = 0;
      bool all = true;
      for (int b = 1; b <= n && all; ++b) {
        all = known(a, b, p);
        if (all) sum += map(a, b)[p];
      }
      if (!all) continue;
      const double rhs = p == 0 ? static_cast<double>(N) * counts[static_cast<std::size_t>(a)] : 0.0;
      out.record("row_sum", std::abs(sum - rhs) / scale);
    }
  }
}

}  // namespace

bool PropertyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

const PropertyCheck& PropertyReport::operator[](const std::string& name) const {
  auto it = std::find_if(checks.begin(), checks.end(), [&](const PropertyCheck& c) { return c.name == name; });
  if (it == checks.end()) throw std::out_of_range("no check named " + name);
  return *it;
}

PropertyReport check_properties(const DftCorrelationMap& map, double tol) {
  ReportBuilder builder(tol);
  check_into(map, builder);
  return builder.take();
}

PropertyReport check_properties(const Structure& s, double tol) { return check_properties(dft_correlations(s), tol); }

double vanishing_tolerance(const Shape& dims) {
  const auto N = static_cast<double>(element_count(dims));
  return 1e-9 * N * N;
}

std::vector<std::size_t> count_vanishing(const Structure& s, std::optional<double> tol) {
  const double t = tol.value_or(vanishing_tolerance(s.dims()));
  std::vector<std::size_t> out;
  for (const auto& ind : indicators(s)) {
    const ComplexArray f = dft(ind);
    out.push_back(static_cast<std::size_t>(
        std::count_if(f.values().begin(), f.values().end(), [&](const Complex& v) { return std::norm(v) <= t; })));
  }
  return out;
}

std::vector<ComplexArray> correlation_row(const Structure& s, int gamma) {
  const auto map = dft_correlations(s);
  std::vector<ComplexArray> row;
  for (int b = 1; b < s.phases(); ++b) row.push_back(map(gamma, b));
  return row;
}

namespace {

/// #n from sum_{b<n} C^_nb,0 = #n (N - #n); both roots are tested for
/// integral phase counts.
double last_phase_count(const std::vector<ComplexArray>& row, std::size_t N) {
  double s = 0;
  for (const auto& c : row) s += c[0].real();
  const double Nd = static_cast<double>(N);
  const double disc = Nd * Nd - 4 * s;
  if (disc < -1e-6) throw InconsistentRow("row zero frequencies admit no phase count");
  const double root = std::sqrt(std::max(0.0, disc));
  std::vector<double> candidates;
  for (double x : {(Nd - root) / 2, (Nd + root) / 2}) {
    const double xr = std::nearbyint(x);
    if (std::abs(x - xr) > 1e-6 || xr < 0 || xr > Nd) continue;
    double rest = xr;
    bool integral = true;
    for (const auto& c : row) {
      if (xr == 0) {
        integral = integral && std::abs(c[0]) < 1e-6;
        continue;
      }
      const double count = c[0].real() / xr;
      integral = integral && std::abs(count - std::nearbyint(count)) < 1e-6 && count > -1e-6;
      rest += std::nearbyint(count);
    }
    if (integral && (xr == 0 || std::abs(rest - Nd) < 1e-6)) candidates.push_back(xr);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.size() != 1)
    throw InconsistentRow(candidates.empty() ? "row admits no integral phase count for the last phase"
                                             : "row admits several phase counts for the last phase");
  return candidates.front();
}

}  // namespace

RowReconstruction reconstruct_from_row(const Shape& dims, int phases, int gamma, const std::vector<ComplexArray>& row,
                                       ReconstructionOptions options) {
  const int n = phases;
  if (gamma < 1 || gamma > n) throw PhaseError("gamma outside 1..n");
  if (static_cast<int>(row.size()) != n - 1)
    throw InconsistentRow("row needs n - 1 = " + std::to_string(n - 1) + " entries");
  for (const auto& c : row)
    if (c.dims() != dims) throw DimensionError("row entry dims do not match");
  const std::size_t N = element_count(dims);
  const double Nd = static_cast<double>(N);
  const double tol = options.tol.value_or(vanishing_tolerance(dims));
  const auto mirror = mirror_table(dims);

  RowReconstruction out{DftCorrelationMap(dims, n), {}, {}, 0};
  DftCorrelationMap& map = out.map;
  for (int b = 1; b < n; ++b)
    for (std::size_t p = 0; p < N; ++p) map.set(gamma, b, p, row[static_cast<std::size_t>(b - 1)][p]);

  // Phase counts: #g, then #b = C^_gb,0 / #g.
  const double count_g = gamma < n ? std::sqrt(std::max(0.0, row[static_cast<std::size_t>(gamma - 1)][0].real()))
                                   : last_phase_count(row, N);
  std::vector<std::optional<double>> counts(static_cast<std::size_t>(n) + 1);
  counts[static_cast<std::size_t>(gamma)] = count_g;
  if (count_g > 0) {
    double others = 0;
    for (int b = 1; b < n; ++b) {
      if (b == gamma) continue;
      const double c = row[static_cast<std::size_t>(b - 1)][0].real() / count_g;
      counts[static_cast<std::size_t>(b)] = c;
      others += c;
    }
    if (gamma < n) counts[static_cast<std::size_t>(n)] = Nd - others - count_g;
  }
  if (count_g < -1e-9 || std::isnan(count_g)) throw InconsistentRow("negative phase count");

  // C^_gn (or C^_nn when g = n) from the row sum.
  for (std::size_t p = 0; p < N; ++p) {
    Complex sum = 0;
    for (int b = 1; b < n; ++b) sum += map(gamma, b)[p];
    map.set(gamma, n, p, (p == 0 ? Complex(Nd * count_g, 0) : Complex(0, 0)) - sum);
  }
  for (int b = 1; b <= n; ++b)
    for (std::size_t p = 0; p < N; ++p) map.set(b, gamma, p, std::conj(map(gamma, b)[p]));

  // Division rule wherever C^_gg,p does not vanish.
  const auto& diag = map(gamma, gamma);
  for (std::size_t p = 0; p < N; ++p) {
    if (std::abs(diag[p]) <= tol) {
      out.undetermined_frequencies.push_back(p);
      continue;
    }
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b)
        if (!map.is_known(a, b, p)) map.set(a, b, p, map(a, gamma)[p] * map(gamma, b)[p] / diag[p]);
  }

  auto fill = [&](int a, int b, std::size_t p, Complex v, const char* rule) {
    map.set(a, b, p, v);
    out.resolved.push_back({a, b, p, rule});
  };
  auto row_rhs = [&](int a, std::size_t p) -> std::optional<Complex> {
    if (p != 0) return Complex(0, 0);
    if (map.is_known(a, a, 0)) return Complex(Nd * std::sqrt(std::max(0.0, map(a, a)[0].real())), 0);
    if (counts[static_cast<std::size_t>(a)]) return Complex(Nd * *counts[static_cast<std::size_t>(a)], 0);
    return std::nullopt;
  };
  auto count_of = [&](int a) -> std::optional<double> {
    if (map.is_known(a, a, 0)) return std::sqrt(std::max(0.0, map(a, a)[0].real()));
    return counts[static_cast<std::size_t>(a)];
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b)
        for (std::size_t p = 0; p < N; ++p)
          if (map.is_known(a, b, p) && !map.is_known(b, a, p)) {
            fill(b, a, p, std::conj(map(a, b)[p]), "transpose");
            changed = true;
          }
    for (int a = 1; a <= n; ++a)
      for (std::size_t p = 0; p < N; ++p) {
        int missing = 0, unknown = 0;
        Complex sum = 0;
        for (int b = 1; b <= n; ++b) {
          if (map.is_known(a, b, p))
            sum += map(a, b)[p];
          else {
            missing = b;
            ++unknown;
          }
        }
        if (unknown != 1) continue;
        const auto rhs = row_rhs(a, p);
        if (!rhs) continue;
        fill(a, missing, p, *rhs - sum, "row-sum");
        changed = true;
      }
    if (options.use_symmetry)
      for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b)
          for (std::size_t p = 0; p < N; ++p)
            if (map.is_known(a, b, p) && !map.is_known(a, b, mirror[p])) {
              fill(a, b, mirror[p], std::conj(map(a, b)[p]), "symmetry");
              changed = true;
            }
    if (options.use_inverse_sum)
      for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b) {
          std::vector<std::size_t> unknown;
          Complex sum = 0;
          for (std::size_t p = 0; p < N; ++p) {
            if (map.is_known(a, b, p))
              sum += map(a, b)[p];
            else
              unknown.push_back(p);
          }
          if (unknown.empty()) continue;
          Complex rhs = 0;
          if (a == b) {
            const auto c = count_of(a);
            if (!c) continue;
            rhs = Complex(Nd * *c, 0);
          }
          const Complex remainder = rhs - sum;
          if (unknown.size() == 1) {
            fill(a, b, unknown[0], remainder, "inverse-sum");
            changed = true;
          } else if (unknown.size() == 2 && options.use_symmetry && a == b &&
                     mirror[unknown[0]] == unknown[1]) {
            // Diagonal spectra are real; the mirrored pair shares one value.
            fill(a, b, unknown[0], Complex(remainder.real() / 2, 0), "inverse-sum");
            changed = true;
          }
        }
  }

  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b)
      for (std::size_t p = 0; p < N; ++p)
        if (!map.is_known(a, b, p)) ++out.unknown_entries;
  return out;
}

PerturbationDelta::PerturbationDelta(Shape dims, int phases)
    : dims_(std::move(dims)), phases_(phases), values_(static_cast<std::size_t>(phases * phases), ComplexArray(dims_)) {}

PropertyReport verify_ambiguity(const Structure& s, int gamma, const PerturbationDelta& delta, double tol) {
  if (delta.dims() != s.dims() || delta.phases() != s.phases())
    throw DimensionError("perturbation does not match the structure");
  if (gamma < 1 || gamma > s.phases()) throw PhaseError("gamma outside 1..n");
  DftCorrelationMap perturbed = dft_correlations(s);
  const int n = s.phases();
  const std::size_t N = s.size();
  const double scale = static_cast<double>(N) * static_cast<double>(N);
  double row_change = 0;
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b)
      for (std::size_t p = 0; p < N; ++p) {
        perturbed(a, b)[p] += delta(a, b)[p];
        if (a == gamma) row_change = std::max(row_change, std::abs(delta(a, b)[p]) / scale);
      }
  ReportBuilder builder(tol);
  builder.record("row_unchanged", row_change);
  check_into(perturbed, builder);
  return builder.take();
}

}  // namespace eq2pc
