#include "eq2pc/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "eq2pc/database.hpp"
#include "eq2pc/homog.hpp"
#include "eq2pc/io.hpp"
#include "eq2pc/niezgoda.hpp"
#include "eq2pc/search.hpp"

namespace eq2pc::cli {

namespace {

namespace fs = std::filesystem;

/// Verification or comparison failure that maps to the computation exit code.
class ComputationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

std::string dims_text(const Shape& dims) {
  std::string out;
  for (std::size_t d = 0; d < dims.size(); ++d) out += (d ? "x" : "") + std::to_string(dims[d]);
  return out;
}

/// Cells with rows of the last axis separated by " / ".
std::string cells_text(const Structure& s) {
  const std::size_t row = s.dims().back();
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += i % row == 0 ? " / " : " ";
    out += std::to_string(s[i]);
  }
  return out;
}

std::string frequency_text(std::size_t flat, const Shape& dims) {
  if (dims.size() == 1) return std::to_string(flat);
  std::vector<std::size_t> p(dims.size());
  unravel(flat, dims, p);
  std::string out = "(";
  for (std::size_t d = 0; d < p.size(); ++d) out += (d ? "," : "") + std::to_string(p[d]);
  return out + ")";
}

std::uint64_t budget_from_env(std::uint64_t fallback) {
  if (const char* v = std::getenv("EQ2PC_BUDGET")) {
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("EQ2PC_BUDGET must be a non-negative integer");
    }
  }
  return fallback;
}

Factors factors_for(const std::vector<std::size_t>& values, std::size_t rank) {
  if (values.size() == 1 && rank > 1) return Factors(std::vector<std::size_t>(rank, values.front()));
  return Factors(values);
}

Structure load(const std::string& path) { return load_structure(path).structure; }

// --- search ---------------------------------------------------------------

struct SearchArgs {
  std::vector<std::size_t> dims;
  int phases = 2;
  std::vector<std::size_t> counts;
  std::size_t limit = 0;
  std::string out_dir;
  std::uint64_t budget = 0;
  unsigned threads = 1;
  bool axis_permutations = false;
};

int cmd_search(const SearchArgs& a, std::ostream& out) {
  SearchSpec spec;
  spec.dims = a.dims;
  spec.phases = a.phases;
  if (!a.counts.empty()) spec.counts = a.counts;
  if (a.limit) spec.limit = a.limit;
  spec.budget = a.budget ? a.budget : budget_from_env(kDefaultEnumerationBudget);
  spec.threads = a.threads;
  spec.axis_permutations = a.axis_permutations;

  const auto classes = find_root_sets(spec);
  out << "candidates: " << candidate_count(spec) << "\n";
  if (classes.empty()) {
    out << "no classes found\n";
    return kExitOk;
  }
  out << "classes: " << classes.size() << "\n";
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& cls = classes[c];
    out << "class " << c << " fingerprint " << cls.fingerprint << "\n";
    for (std::size_t m = 0; m < cls.members.size(); ++m) out << "  " << cells_text(cls.members[m]) << "\n";
    if (!a.out_dir.empty()) {
      std::ostringstream name;
      name << "class_" << std::setw(3) << std::setfill('0') << c;
      const fs::path dir = fs::path(a.out_dir) / name.str();
      Json manifest;
      manifest["fingerprint"] = cls.fingerprint;
      manifest["dims"] = spec.dims;
      manifest["phases"] = spec.phases;
      Json members = Json::array();
      for (std::size_t m = 0; m < cls.members.size(); ++m) {
        const std::string file = "member_" + std::to_string(m) + ".json";
        save_structure(dir / file, cls.members[m]);
        members.push_back(file);
      }
      manifest["members"] = members;
      write_text_file(dir / "manifest.json", manifest.dump(1) + "\n");
    }
  }
  return kExitOk;
}

// --- derive ---------------------------------------------------------------

struct DeriveArgs {
  std::string operation;
  std::vector<std::string> inputs;
  std::vector<std::size_t> z;
  std::vector<std::size_t> factor;
  std::string kernels;
  std::string plan;
  std::string out_dir;
};

int cmd_derive(const DeriveArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<Structure> parents;
  for (const auto& in : a.inputs) parents.push_back(load(in));

  Json parameters;
  if (a.operation == "phase_extend") {
    if (a.z.empty()) throw std::invalid_argument("phase_extend needs --z");
    parameters["z"] = a.z;
  } else if (a.operation == "kernel_extend") {
    if (a.kernels.empty()) throw std::invalid_argument("kernel_extend needs --kernels");
    parameters = kernels_to_json(kernels_from_json(read_json_file(a.kernels)));
    if (!a.z.empty()) parameters["z"] = a.z;
  } else if (a.operation == "coalesce") {
    if (a.plan.empty()) throw std::invalid_argument("coalesce needs --plan");
    parameters = plan_to_json(plan_from_json(read_json_file(a.plan)));
  } else if (a.operation == "upsample") {
    if (a.factor.empty()) throw std::invalid_argument("upsample needs --factor");
  } else {
    throw std::invalid_argument("unknown operation \"" + a.operation + "\"");
  }

  std::vector<Structure> children;
  std::vector<Json> child_parameters;
  for (const auto& p : parents) {
    Json params = parameters;
    if (a.operation == "upsample") params["factor"] = factors_for(a.factor, p.rank()).entries();
    children.push_back(apply_operation(a.operation, params, {p}));
    child_parameters.push_back(params);
  }

  if (parents.size() >= 2) {
    bool inputs_equivalent = true;
    for (std::size_t i = 1; i < parents.size(); ++i) inputs_equivalent = inputs_equivalent && equivalent(parents[0], parents[i]);
    if (inputs_equivalent) {
      for (std::size_t i = 1; i < children.size(); ++i)
        if (!equivalent(children[0], children[i]))
          throw ComputationFailure("derived structures lost 2PC-equivalence; nothing written");
      out << "inherited 2PC-equivalence: verified\n";
    } else {
      err << "warning: inputs are not 2PC-equivalent; inheritance not checked\n";
    }
  }

  DerivationDatabase db(a.out_dir);
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const std::string parent_id = db.add_structure(parents[i]);
    const std::string child_id = db.add_structure(children[i]);
    const auto& rec = db.record(a.operation, child_parameters[i], {parent_id}, child_id);
    out << a.inputs[i] << " -> " << db.structure_path(child_id).string() << " (record " << rec.id << ")\n";
  }
  db.flush();
  return kExitOk;
}

// --- compare --------------------------------------------------------------

struct CompareArgs {
  std::string first;
  std::string second;
  std::size_t mpc_order = 0;
  std::vector<int> mpc_phases;
  std::size_t refine = 1;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  Structure s1 = load(a.first), s2 = load(a.second);
  if (s1.dims() != s2.dims() || s1.phases() != s2.phases()) {
    out << "2PC-equivalent: not comparable (dims " << dims_text(s1.dims()) << " vs " << dims_text(s2.dims())
        << ", phases " << s1.phases() << " vs " << s2.phases() << ")\n";
    return kExitOk;
  }
  out << "dims: " << dims_text(s1.dims()) << "\n";
  out << "2PC-equivalent: " << (equivalent(s1, s2) ? "yes" : "no") << "\n";
  const auto t1 = all_two_point(s1), t2 = all_two_point(s2);
  for (int x = 1; x <= s1.phases(); ++x)
    for (int y = 1; y <= s1.phases(); ++y) {
      std::int64_t dev = 0;
      for (std::size_t p = 0; p < s1.size(); ++p) dev = std::max(dev, std::abs(t1(x, y)[p] - t2(x, y)[p]));
      out << "pair (" << x << "," << y << ") max deviation " << dev << "\n";
    }
  if (a.mpc_order) {
    std::vector<int> phases = a.mpc_phases;
    if (phases.empty()) phases.assign(a.mpc_order, 1);
    if (phases.size() != a.mpc_order) throw std::invalid_argument("--mpc-phases needs one phase per point");
    if (a.refine > 1) {
      const Factors f = factors_for({a.refine}, s1.rank());
      s1 = upsample(s1, f);
      s2 = upsample(s2, f);
    }
    const auto dev = mpc_deviation(s1, s2, MpcSpec(phases));
    out << a.mpc_order << "-point deviation (refinement " << a.refine << "): " << num(100 * dev.relative()) << "%\n";
  }
  return kExitOk;
}

// --- homog ----------------------------------------------------------------

struct HomogArgs {
  std::string file;
  double k1 = 0;
  double k2 = 0;
  std::size_t refine = 1;
  std::string against;
  bool csv = false;
};

Eigen::Matrix2d display(const Eigen::Matrix2d& K) {
  Eigen::Matrix2d out = K;
  for (int i = 0; i < 4; ++i)
    if (std::abs(out(i)) < 1e-9 * K.norm()) out(i) = 0;
  return out;
}

int cmd_homog(const HomogArgs& a, std::ostream& out, std::ostream& err) {
  const ConductivityProblem problem(load(a.file), a.k1, a.k2);
  const auto result = effective_conductivity(problem, a.refine);
  const Eigen::Matrix2d K = display(result.K);
  if (result.asymmetric()) err << "warning: effective tensor asymmetry " << num(result.asymmetry) << "\n";
  if (a.csv) {
    out << "refinement,k11,k12,k21,k22\n"
        << a.refine << "," << num(K(0, 0)) << "," << num(K(0, 1)) << "," << num(K(1, 0)) << "," << num(K(1, 1)) << "\n";
  } else {
    const double v1 = problem.volume_fraction();
    const auto b = bounds(v1, a.k1, a.k2);
    out << "refinement: " << a.refine << "\n"
        << "v1: " << num(v1) << "\n"
        << "K_bar:\n  " << num(K(0, 0)) << " " << num(K(0, 1)) << "\n  " << num(K(1, 0)) << " " << num(K(1, 1)) << "\n"
        << "cg iterations: " << result.iterations[0] << " " << result.iterations[1] << "\n"
        << "voigt " << num(b.voigt) << " reuss " << num(b.reuss) << " hs_upper " << num(b.hs_upper) << " hs_lower "
        << num(b.hs_lower) << "\n";
  }
  if (!a.against.empty()) {
    const auto other = effective_conductivity(ConductivityProblem(load(a.against), a.k1, a.k2), a.refine);
    const Eigen::Matrix2d K2 = display(other.K);
    out << "K_bar (" << a.against << "):\n  " << num(K2(0, 0)) << " " << num(K2(0, 1)) << "\n  " << num(K2(1, 0)) << " "
        << num(K2(1, 1)) << "\n"
        << "relative deviation: " << num(100 * relative_deviation(result.K, other.K)) << "%\n";
  }
  return kExitOk;
}

// --- bounds ---------------------------------------------------------------

int cmd_bounds(double k1, double k2, std::size_t samples, std::ostream& out) {
  out << "v1,voigt,reuss,hs_upper,hs_lower\n";
  for (const auto& s : bounds_curve(k1, k2, samples))
    out << num(s.v1) << "," << num(s.values.voigt) << "," << num(s.values.reuss) << "," << num(s.values.hs_upper) << ","
        << num(s.values.hs_lower) << "\n";
  return kExitOk;
}

// --- niezgoda -------------------------------------------------------------

struct NiezgodaArgs {
  std::string file;
  int gamma = 1;
  bool symmetry = false;
  bool inverse_sum = false;
};

int cmd_niezgoda(const NiezgodaArgs& a, std::ostream& out) {
  const Structure s = load(a.file);
  out << "dims: " << dims_text(s.dims()) << " phases: " << s.phases() << "\n";
  out << "vanishing frequencies per phase:";
  for (auto c : count_vanishing(s)) out << " " << c;
  out << "\n";
  const auto report = check_properties(s);
  out << "properties: " << (report.all_passed() ? "all hold" : "VIOLATED") << "\n";
  for (const auto& c : report.checks)
    out << "  " << c.name << " " << num(c.max_violation) << (c.passed ? "" : " FAIL") << "\n";

  ReconstructionOptions opts;
  opts.use_symmetry = a.symmetry;
  opts.use_inverse_sum = a.inverse_sum;
  const auto r = reconstruct_from_row(s.dims(), s.phases(), a.gamma, correlation_row(s, a.gamma), opts);
  out << "reconstruction from row " << a.gamma << "\n";
  out << "undetermined frequencies: ";
  if (r.undetermined_frequencies.empty()) out << "none";
  for (std::size_t i = 0; i < r.undetermined_frequencies.size(); ++i)
    out << (i ? ", " : "") << frequency_text(r.undetermined_frequencies[i], s.dims());
  out << "\n";
  std::map<std::string, std::size_t> by_rule;
  for (const auto& e : r.resolved) ++by_rule[e.rule];
  out << "resolved entries:";
  if (by_rule.empty()) out << " none";
  for (const auto& [rule, count] : by_rule) out << " " << rule << "=" << count;
  out << "\n";
  out << "unknown entries: " << r.unknown_entries << "\n";
  if (r.unknown_entries == 0) {
    const auto truth = dft_correlations(s);
    double err = 0;
    for (int x = 1; x <= s.phases(); ++x)
      for (int y = 1; y <= s.phases(); ++y) err = std::max(err, max_abs_difference(truth(x, y), r.map(x, y)));
    out << "max reconstruction error: " << num(err) << "\n";
  }
  return kExitOk;
}

// --- db-replay ------------------------------------------------------------

int cmd_replay(const std::string& dir, std::ostream& out) {
  if (!fs::exists(fs::path(dir) / "derivations.json")) throw std::invalid_argument("no derivations.json in " + dir);
  DerivationDatabase db(dir);
  const auto bad = db.replay();
  out << "records: " << db.records().size() << "\n";
  if (!bad.empty()) {
    for (const auto& id : bad) out << "mismatch: " << id << "\n";
    throw ComputationFailure(std::to_string(bad.size()) + " records did not reproduce");
  }
  out << "all children reproduced\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-point correlation equivalence toolkit", "eq2pc"};
  app.require_subcommand(1);

  SearchArgs search;
  auto* s = app.add_subcommand("search", "Enumerate structures and report 2PC-equivalent root classes");
  s->add_option("dims", search.dims, "Periods P_1 ... P_D")->required()->check(CLI::PositiveNumber);
  s->add_option("-n,--phases", search.phases, "Number of phases")->check(CLI::Range(1, 255));
  s->add_option("--counts", search.counts, "Fixed cells per phase")->delimiter(',');
  s->add_option("--limit", search.limit, "Maximum classes reported");
  s->add_option("--out", search.out_dir, "Write class directories here");
  s->add_option("--budget", search.budget, "Enumeration budget (overrides EQ2PC_BUDGET)");
  s->add_option("--threads", search.threads, "Fingerprint threads, 0 for all cores");
  s->add_flag("--axis-permutations", search.axis_permutations, "Treat axis permutations as related");

  DeriveArgs derive;
  auto* d = app.add_subcommand("derive", "Apply a derivation to each input and record it");
  d->add_option("operation", derive.operation, "phase_extend, kernel_extend, coalesce or upsample")
      ->required()
      ->check(CLI::IsMember({"phase_extend", "kernel_extend", "coalesce", "upsample"}));
  d->add_option("inputs", derive.inputs, "Structure files")->required()->check(CLI::ExistingFile);
  d->add_option("--z", derive.z, "Embedding factors (phase_extend, optionally kernel_extend)")->delimiter(',');
  d->add_option("--factor", derive.factor, "Upsampling factors (one value applies to every axis)")->delimiter(',');
  d->add_option("--kernels", derive.kernels, "Kernel list JSON")->check(CLI::ExistingFile);
  d->add_option("--plan", derive.plan, "Coalescence plan JSON")->check(CLI::ExistingFile);
  d->add_option("--out", derive.out_dir, "Database directory")->required();

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Compare the correlations of two structures");
  c->add_option("first", compare.first)->required()->check(CLI::ExistingFile);
  c->add_option("second", compare.second)->required()->check(CLI::ExistingFile);
  c->add_option("--mpc", compare.mpc_order, "Order M of the point correlation deviation")->check(CLI::Range(2, 16));
  c->add_option("--mpc-phases", compare.mpc_phases, "Phases of the M points (default all 1)")->delimiter(',');
  c->add_option("--refine", compare.refine, "Upsampling factor before the M-point comparison")->check(CLI::PositiveNumber);

  HomogArgs homog;
  auto* h = app.add_subcommand("homog", "Effective conductivity of a two-phase 2D structure");
  h->add_option("file", homog.file)->required()->check(CLI::ExistingFile);
  h->add_option("k1", homog.k1, "Conductivity of phase 1")->required()->check(CLI::PositiveNumber);
  h->add_option("k2", homog.k2, "Conductivity of phase 2")->required()->check(CLI::PositiveNumber);
  h->add_option("--refine", homog.refine, "Pixel replication factor")->check(CLI::PositiveNumber);
  h->add_option("--against", homog.against, "Second structure; prints the relative deviation")
      ->check(CLI::ExistingFile);
  h->add_flag("--csv", homog.csv, "CSV output");

  double bk1 = 0, bk2 = 0;
  std::size_t samples = 101;
  auto* b = app.add_subcommand("bounds", "Voigt, Reuss and Hashin-Shtrikman bounds as CSV");
  b->add_option("k1", bk1)->required()->check(CLI::PositiveNumber);
  b->add_option("k2", bk2)->required()->check(CLI::PositiveNumber);
  b->add_option("--samples", samples, "Uniform v1 samples")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));

  NiezgodaArgs niezgoda;
  auto* nz = app.add_subcommand("niezgoda", "DFT correlation properties and reconstruction from one row");
  nz->add_option("file", niezgoda.file)->required()->check(CLI::ExistingFile);
  nz->add_option("--gamma", niezgoda.gamma, "Row phase")->check(CLI::PositiveNumber);
  nz->add_flag("--symmetry", niezgoda.symmetry, "Use DFT symmetry to resolve entries");
  nz->add_flag("--inverse-sum", niezgoda.inverse_sum, "Use the inverse-sum relation to resolve entries");

  std::string render_file, render_out;
  std::size_t block = 32;
  auto* r = app.add_subcommand("render", "Write a P6 image of a structure");
  r->add_option("file", render_file)->required()->check(CLI::ExistingFile);
  r->add_option("--out", render_out, "Image path")->required();
  r->add_option("--block", block, "Pixels per cell edge")->check(CLI::PositiveNumber);

  std::string replay_dir;
  auto* rp = app.add_subcommand("db-replay", "Re-apply every recorded derivation and compare");
  rp->add_option("dir", replay_dir)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_search(search, out);
    if (d->parsed()) return cmd_derive(derive, out, err);
    if (c->parsed()) return cmd_compare(compare, out);
    if (h->parsed()) return cmd_homog(homog, out, err);
    if (b->parsed()) return cmd_bounds(bk1, bk2, samples, out);
    if (nz->parsed()) return cmd_niezgoda(niezgoda, out);
    if (r->parsed()) {
      render_ppm(render_out, load(render_file), block);
      out << "wrote " << render_out << "\n";
      return kExitOk;
    }
    if (rp->parsed()) return cmd_replay(replay_dir, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitUsage;
}

}  // namespace eq2pc::cli
