#include "eq2pc/search.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>

namespace eq2pc {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

void validate_counts(const SearchSpec& spec) {
  if (!spec.counts) return;
  const auto& c = *spec.counts;
  if (c.size() != static_cast<std::size_t>(spec.phases))
    throw std::invalid_argument("phase-count vector needs one entry per phase");
  if (std::accumulate(c.begin(), c.end(), std::size_t{0}) != element_count(spec.dims))
    throw std::invalid_argument("phase counts must sum to the number of cells");
}

}  // namespace

std::uint64_t candidate_count(const SearchSpec& spec) {
  if (spec.phases < 1) throw PhaseError("search needs at least one phase");
  validate_counts(spec);
  const std::size_t N = element_count(spec.dims);
  if (!spec.counts) {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < N; ++i) total = saturating_mul(total, static_cast<std::uint64_t>(spec.phases));
    return total;
  }
  // Multinomial as a product of binomials, each built exactly.
  std::uint64_t total = 1;
  std::size_t placed = 0;
  for (std::size_t c : *spec.counts) {
    unsigned __int128 binom = 1;
    for (std::size_t k = 1; k <= c; ++k) {
      binom = binom * (placed + k) / k;
      if (binom > kSaturated) return kSaturated;
    }
    placed += c;
    total = saturating_mul(total, static_cast<std::uint64_t>(binom));
  }
  return total;
}

StructureEnumerator::StructureEnumerator(const SearchSpec& spec)
    : dims_(spec.dims), phases_(spec.phases), fixed_counts_(spec.counts.has_value()), count_(candidate_count(spec)) {
  if (count_ > spec.budget)
    throw BudgetExceeded(std::to_string(count_) + " candidate structures exceed the enumeration budget of " +
                         std::to_string(spec.budget));
  const std::size_t N = element_count(dims_);
  if (fixed_counts_) {
    // Smallest in colex order: highest phases in the leading cells.
    for (int a = phases_; a >= 1; --a)
      cells_.insert(cells_.end(), (*spec.counts)[static_cast<std::size_t>(a - 1)], a);
  } else {
    cells_.assign(N, 1);
  }
}

bool StructureEnumerator::advance() {
  if (fixed_counts_) return std::next_permutation(cells_.rbegin(), cells_.rend());
  for (auto& c : cells_) {
    if (c < phases_) {
      ++c;
      return true;
    }
    c = 1;
  }
  return false;
}

std::optional<Structure> StructureEnumerator::next() {
  if (done_) return std::nullopt;
  if (started_ && !advance()) {
    done_ = true;
    return std::nullopt;
  }
  started_ = true;
  return Structure(dims_, phases_, cells_);
}

namespace {

/// Maps output cells onto source cells for one geometric transform.
class TransformGroup {
 public:
  TransformGroup(const Shape& dims, RelationOptions options) : dims_(dims) {
    const std::size_t D = dims.size();
    std::vector<std::size_t> perm(D);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      bool shape_preserving = true;
      for (std::size_t d = 0; d < D; ++d) shape_preserving = shape_preserving && dims[perm[d]] == dims[d];
      if (shape_preserving) perms_.push_back(perm);
    } while (options.axis_permutations && std::next_permutation(perm.begin(), perm.end()));
  }

  std::uint64_t size() const {
    return saturating_mul(saturating_mul(perms_.size(), std::uint64_t{1} << dims_.size()), element_count(dims_));
  }

  /// Calls f(source_of) for each transform; source_of[flat_out] = flat_in.
  /// Stops early if f returns true.
  template <typename F>
  bool for_each(F&& f) const {
    const std::size_t D = dims_.size();
    const std::size_t N = element_count(dims_);
    std::vector<std::size_t> source(N), p(D), q(D), shift(D);
    for (const auto& perm : perms_) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << D); ++mask) {
        for (std::size_t sflat = 0; sflat < N; ++sflat) {
          unravel(sflat, dims_, shift);
          for (std::size_t flat = 0; flat < N; ++flat) {
            unravel(flat, dims_, p);
            std::size_t src = 0;
            for (std::size_t d = 0; d < D; ++d) {
              const std::size_t P = dims_[d];
              std::size_t v = p[perm[d]];
              if (mask >> d & 1) v = (P - v) % P;
              src = src * P + (v + shift[d]) % P;
            }
            source[flat] = src;
          }
          if (f(source)) return true;
        }
      }
    }
    return false;
  }

 private:
  Shape dims_;
  std::vector<std::vector<std::size_t>> perms_;
};

/// Phase labels in order of first appearance: the lexicographic minimum
/// over all phase permutations.
std::vector<int> relabeled(const Structure& s, const std::vector<std::size_t>& source) {
  std::vector<int> label(static_cast<std::size_t>(s.phases()) + 1, 0);
  int next = 0;
  std::vector<int> out(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    int& l = label[static_cast<std::size_t>(s[source[i]])];
    if (l == 0) l = ++next;
    out[i] = l;
  }
  return out;
}

std::vector<int> relabeled_identity(const Structure& s) {
  std::vector<std::size_t> id(s.size());
  std::iota(id.begin(), id.end(), 0);
  return relabeled(s, id);
}

}  // namespace

bool related(const Structure& a, const Structure& b, RelationOptions options) {
  if (a.dims() != b.dims() || a.phases() != b.phases()) return false;
  if ([&] {
        auto ca = phase_counts(a), cb = phase_counts(b);
        std::sort(ca.begin(), ca.end());
        std::sort(cb.begin(), cb.end());
        return ca != cb;
      }())
    return false;
  const std::vector<int> target = relabeled_identity(b);
  TransformGroup group(a.dims(), options);
  return group.for_each([&](const std::vector<std::size_t>& source) { return relabeled(a, source) == target; });
}

std::string canonical_form(const Structure& s, RelationOptions options, std::uint64_t budget) {
  TransformGroup group(s.dims(), options);
  if (saturating_mul(group.size(), s.size()) > budget)
    throw BudgetExceeded("relatedness group too large for a canonical form");
  std::vector<int> best;
  group.for_each([&](const std::vector<std::size_t>& source) {
    auto candidate = relabeled(s, source);
    if (best.empty() || candidate < best) best = std::move(candidate);
    return false;
  });
  std::string out;
  auto put = [&out](std::uint64_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>(v >> (8 * b) & 0xff));
  };
  put(s.rank());
  for (auto P : s.dims()) put(P);
  put(static_cast<std::uint64_t>(s.phases()));
  for (int l : best) {
    if (s.phases() < 256)
      out.push_back(static_cast<char>(l));
    else
      put(static_cast<std::uint64_t>(l));
  }
  return out;
}

namespace {

/// Greedy pairwise-unrelated representatives in input order.
std::vector<Structure> unrelated_representatives(const std::vector<Structure>& members, RelationOptions options) {
  std::vector<Structure> reps;
  try {
    std::vector<std::string> seen;
    for (const auto& s : members) {
      auto form = canonical_form(s, options);
      if (std::find(seen.begin(), seen.end(), form) != seen.end()) continue;
      seen.push_back(std::move(form));
      reps.push_back(s);
    }
  } catch (const BudgetExceeded&) {
    reps.clear();
    for (const auto& s : members) {
      const bool fresh =
          std::none_of(reps.begin(), reps.end(), [&](const Structure& r) { return related(r, s, options); });
      if (fresh) reps.push_back(s);
    }
  }
  return reps;
}

}  // namespace

std::vector<EquivalenceClass> find_root_sets(const SearchSpec& spec) {
  StructureEnumerator enumerator(spec);
  std::vector<Structure> candidates;
  candidates.reserve(enumerator.count());
  while (auto s = enumerator.next()) candidates.push_back(std::move(*s));

  // Fingerprints over contiguous chunks, merged afterwards.
  std::vector<std::string> prints(candidates.size());
  unsigned workers = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(candidates.size(), 1)));
  const std::size_t chunk = (candidates.size() + workers - 1) / workers;
  auto work = [&](unsigned w) {
    const std::size_t end = std::min(candidates.size(), (w + 1) * chunk);
    for (std::size_t i = w * chunk; i < end; ++i) prints[i] = independent_set(candidates[i]).fingerprint();
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();

  std::unordered_map<std::string, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < candidates.size(); ++i) buckets[prints[i]].push_back(i);

  std::vector<std::pair<std::size_t, EquivalenceClass>> found;
  const RelationOptions options{spec.axis_permutations};
  for (auto& [print, indices] : buckets) {
    if (indices.size() < 2) continue;
    // Exact re-verification: split on any mismatch of the serialized set.
    std::vector<std::pair<std::string, std::vector<std::size_t>>> exact;
    for (std::size_t i : indices) {
      auto bytes = independent_set(candidates[i]).bytes();
      auto it = std::find_if(exact.begin(), exact.end(), [&](const auto& e) { return e.first == bytes; });
      if (it == exact.end())
        exact.emplace_back(std::move(bytes), std::vector<std::size_t>{i});
      else
        it->second.push_back(i);
    }
    for (auto& [bytes, group] : exact) {
      if (group.size() < 2) continue;
      std::vector<Structure> members;
      for (std::size_t i : group) members.push_back(candidates[i]);
      auto reps = unrelated_representatives(members, options);
      if (reps.size() >= 2) found.emplace_back(group.front(), EquivalenceClass{print, std::move(reps)});
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  std::vector<EquivalenceClass> out;
  for (auto& [first, cls] : found) {
    if (spec.limit && out.size() >= *spec.limit) break;
    out.push_back(std::move(cls));
  }
  return out;
}

}  // namespace eq2pc
