#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blocktri/commutator_lab.hpp"
#include "blocktri/random.hpp"
#include "blocktri/structure_decomp.hpp"
#include "blocktri/tridiagonalize.hpp"
#include "report.hpp"

namespace blocktri::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::map<std::string, double>& tolerance_defaults() {
  static const std::map<std::string, double> defaults = {
      {"band", 1e-10},  {"eig", 1e-8},   {"kernel", 1e-8}, {"lower", 1e-10},
      {"nil", 1e-8},    {"radius", 1e-9}, {"rank", 1e-10},  {"recon", 1e-9},
      {"tri", 1e-9},    {"unit", 1e-10},
  };
  return defaults;
}

// Effective tolerances: defaults, per-command adjustments, then overrides.
std::map<std::string, double> resolve_tolerances(const ExperimentConfig& c) {
  std::map<std::string, double> t = tolerance_defaults();
  if (c.command == Command::decompose) t["radius"] = 1e-12;
  for (const auto& [name, value] : c.tolerances) {
    if (!t.count(name)) throw UsageError("unknown tolerance --tol-" + name);
    if (!(value > 0.0) || !std::isfinite(value))
      throw UsageError("tolerance --tol-" + name + " must be positive");
    t[name] = value;
  }
  return t;
}

TriangularizeOptions triangularize_options(
    const std::map<std::string, double>& t, const ExperimentConfig& c) {
  TriangularizeOptions o;
  o.tol = t.at("tri");
  o.unit_tol = t.at("unit");
  o.eig_tol = t.at("eig");
  o.kernel_tol = t.at("kernel");
  o.nil_tol = t.at("nil");
  o.seed = c.seed;
  if (c.word_len > 0) o.max_word_len = c.word_len;
  return o;
}

std::vector<ComplexMatrix> load_inputs(const ExperimentConfig& c,
                                       std::size_t min_count,
                                       std::size_t max_count) {
  if (c.inputs.size() < min_count || c.inputs.size() > max_count)
    throw UsageError(std::string(to_string(c.command)) + " takes " +
                     std::to_string(min_count) +
                     (min_count == max_count ? "" : "-" + std::to_string(max_count)) +
                     " input files, got " + std::to_string(c.inputs.size()));
  std::vector<ComplexMatrix> out;
  for (const auto& p : c.inputs) {
    if (!std::filesystem::exists(p))
      throw std::filesystem::filesystem_error(
          "input not found", p, std::make_error_code(std::errc::no_such_file_or_directory));
    out.push_back(read_matrix(p));
  }
  return out;
}

ComplexMatrix conjugate(const ComplexMatrix& u, const ComplexMatrix& t) {
  return u * t * u.adjoint();
}

// Block-diagonal pair whose level blocks are common unitary conjugates of
// upper-triangular matrices, scaled by 2^-n.
std::pair<BlockTridiagOperator, BlockTridiagOperator> random_triangularizable_pair(
    const BlockSchedule& schedule, Rng& rng) {
  std::vector<ComplexMatrix> c, z;
  for (int n = 1; n <= schedule.levels(); ++n) {
    const Index k = schedule.size(n);
    const double scale = std::ldexp(1.0, -n);
    const ComplexMatrix u = random_unitary(k, rng);
    c.push_back(scale * conjugate(u, random_upper_triangular(k, rng)));
    z.push_back(scale * conjugate(u, random_upper_triangular(k, rng)));
  }
  return {BlockTridiagOperator::block_diagonal(schedule, std::move(c)),
          BlockTridiagOperator::block_diagonal(schedule, std::move(z))};
}

BlockTridiagOperator random_operator(const BlockSchedule& schedule, Rng& rng) {
  std::vector<ComplexMatrix> diag, upper, lower;
  for (int n = 1; n <= schedule.levels(); ++n) {
    const Index k = schedule.size(n);
    const double scale = std::ldexp(1.0, -n);
    diag.push_back(scale * random_complex_matrix(k, k, rng));
    if (n < schedule.levels()) {
      const Index k2 = schedule.size(n + 1);
      upper.push_back(scale * random_complex_matrix(k, k2, rng));
      lower.push_back(scale * random_complex_matrix(k2, k, rng));
    }
  }
  return BlockTridiagOperator::from_blocks(schedule, std::move(diag),
                                           std::move(upper), std::move(lower));
}

OrderedJson sizes_json(const BlockSchedule& s) {
  OrderedJson out = OrderedJson::array();
  for (Index k : s.sizes()) out.push_back(k);
  return out;
}

bool run_tridiagonalize(const ExperimentConfig& c,
                        const std::map<std::string, double>& tol, Report& r) {
  std::vector<ComplexMatrix> ops;
  ScheduleKind kind = c.schedule;
  if (c.random) {
    Rng rng(c.seed);
    const std::size_t count = kind == ScheduleKind::single ? 1 : 2;
    const Index n = c.size.value_or(BlockSchedule::make(kind, c.levels).total());
    for (std::size_t i = 0; i < count; ++i)
      ops.push_back(random_complex_matrix(n, n, rng));
  } else {
    ops = load_inputs(c, 1, 2);
    if (!c.schedule_given)
      kind = ops.size() == 1 ? ScheduleKind::single : ScheduleKind::pair;
  }
  if (ops.size() == 2) require_same_square(ops[0], ops[1], "tridiagonalize");
  require_square(ops[0], "tridiagonalize");
  const Index n = ops[0].rows();

  TridiagOptions options;
  options.rank_tol = tol.at("rank");
  std::vector<Index> targets;
  if (c.padded) {
    options.mode = TridiagMode::padded;
    targets = schedule_sizes_for_dimension(kind, n);
    options.target_sizes = targets;
  }
  const TridiagResult result = block_tridiagonalize(ops, options);
  const BlockSchedule& s = result.realized_schedule;

  bool pass = !c.padded || s.sizes() == targets;
  OrderedJson band = OrderedJson::array(), eig = OrderedJson::array();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const BandResidual br =
        verify_block_structure(result.transformed[i], s, tol.at("band"));
    const double d = spectrum_distance(eigenvalues(ops[i]),
                                       eigenvalues(result.transformed[i]));
    const double bound = tol.at("eig") * operator_norm(ops[i]);
    band.push_back(br.residual);
    eig.push_back(d);
    pass = pass && br.pass && d <= bound;
  }

  r.document["pipeline"] = "tridiagonalize";
  r.document["mode"] = c.padded ? "padded" : "adaptive";
  r.document["dimension"] = n;
  r.document["inputs"] = ops.size();
  r.document["realized_schedule"] = sizes_json(s);
  if (c.padded) {
    OrderedJson t = OrderedJson::array();
    for (Index k : targets) t.push_back(k);
    r.document["target_schedule"] = t;
  }
  r.document["stabilized_dimension"] = result.stabilized_dimension;
  r.document["padded_vectors"] = result.padded_vectors;
  r.document["residuals"] = {{"band", band},
                             {"eigenvalue_distance", eig},
                             {"unitarity", unitarity_residual(result.basis)}};
  for (int level = 1; level <= s.levels(); ++level)
    add_row(r, {{"level", level},
                {"size", s.size(level)},
                {"cumulative", s.cumsum(level)}});
  r.document["verdict"] = pass ? "pass" : "fail";
  return pass;
}

bool run_triangularize(const ExperimentConfig& c,
                       const std::map<std::string, double>& tol, Report& r) {
  ComplexMatrix a, b;
  if (c.random) {
    Rng rng(c.seed);
    const Index n = c.size.value_or(6);
    const ComplexMatrix u = random_unitary(n, rng);
    a = conjugate(u, random_upper_triangular(n, rng));
    b = conjugate(u, random_upper_triangular(n, rng));
  } else {
    auto ops = load_inputs(c, 2, 2);
    a = std::move(ops[0]);
    b = std::move(ops[1]);
  }
  require_same_square(a, b, "triangularize");

  const TriangularizationCertificate cert =
      simultaneous_triangularize(a, b, triangularize_options(tol, c));
  r.document["pipeline"] = "triangularize";
  r.document["dimension"] = a.rows();
  r.document["verdict"] = to_string(cert.verdict);
  r.document["residuals"] = {{"triangularity", cert.residual},
                             {"unitarity", cert.unitarity_residual}};
  r.document["deflated"] = cert.deflated;
  r.document["refuting_word"] =
      cert.refuting_word ? OrderedJson(*cert.refuting_word) : OrderedJson(nullptr);
  if (cert.witness_unitary) {
    const ComplexMatrix& w = *cert.witness_unitary;
    r.document["witness"] = matrix_to_json(w);
    const ComplexMatrix ta = w.adjoint() * a * w, tb = w.adjoint() * b * w;
    for (Index i = 0; i < a.rows(); ++i)
      add_row(r, {{"index", i},
                  {"a_re", ta(i, i).real()},
                  {"a_im", ta(i, i).imag()},
                  {"b_re", tb(i, i).real()},
                  {"b_im", tb(i, i).imag()}});
  } else {
    r.document["witness"] = nullptr;
  }
  return cert.verdict == Verdict::triangularizable;
}

void add_spectral_rows(const SpectralReport& report, Report& r) {
  for (const auto& lvl : report.levels) {
    OrderedJson row = {{"level", lvl.level},
                       {"radius", lvl.radius},
                       {"norm", lvl.norm}};
    if (lvl.hypothesis) {
      row["hypothesis"] = to_string(*lvl.hypothesis);
      row["hypothesis_residual"] = lvl.hypothesis_residual;
      row["refuting_word"] = lvl.refuting_word ? OrderedJson(*lvl.refuting_word)
                                               : OrderedJson(nullptr);
      row["radius_from_witness"] = lvl.radius_from_witness;
      row["block_fast_path"] = lvl.block_fast_path;
    }
    add_row(r, std::move(row));
  }
}

bool run_certify(const ExperimentConfig& c,
                 const std::map<std::string, double>& tol, Report& r) {
  const BlockSchedule schedule = BlockSchedule::make(c.schedule, c.levels);
  std::optional<BlockTridiagOperator> cop, zop;
  std::string source;
  if (c.counterexample) {
    CounterexamplePair pair = build_counterexample(schedule);
    cop = pair.c_op;
    zop = pair.z_op;
    source = "counterexample";
  } else if (c.random) {
    Rng rng(c.seed);
    auto [x, y] = random_triangularizable_pair(schedule, rng);
    cop = x;
    zop = y;
    source = "random";
  } else {
    auto ops = load_inputs(c, 2, 2);
    cop = BlockTridiagOperator::from_dense(ops[0], schedule);
    zop = BlockTridiagOperator::from_dense(ops[1], schedule);
    source = "files";
  }
  const SpectralReport report = certify_commutator(
      *cop, *zop, c.levels, tol.at("radius"), triangularize_options(tol, c));

  r.document["pipeline"] = "certify";
  r.document["source"] = source;
  r.document["schedule_sizes"] = sizes_json(schedule);
  r.document["verdict"] = to_string(report.verdict);
  r.document["refuted_level"] =
      report.refuted_level ? OrderedJson(*report.refuted_level) : OrderedJson(nullptr);
  r.document["tolerance"] = report.tolerance;
  r.document["decay_ok"] = report.decay_ok;
  r.document["scope"] = report.scope;
  add_spectral_rows(report, r);
  return report.verdict == ReportVerdict::certified_quasinilpotent;
}

bool run_counterexample(const ExperimentConfig& c,
                        const std::map<std::string, double>& tol, Report& r) {
  const BlockSchedule schedule = BlockSchedule::make(c.schedule, c.levels);
  const CounterexamplePair pair = build_counterexample(schedule);
  r.document["pipeline"] = "counterexample";
  r.document["schedule_sizes"] = sizes_json(schedule);

  if (!c.verify) {
    for (int n = 1; n <= c.levels; ++n) {
      const ComplexMatrix corner =
          commutator(corner_compression(pair.c_op, n),
                     corner_compression(pair.z_op, n));
      add_row(r, {{"level", n},
                  {"block_size", schedule.size(n)},
                  {"c_norm", operator_norm(pair.c_op.diag_block(n))},
                  {"z_norm", operator_norm(pair.z_op.diag_block(n))},
                  {"corner_commutator_radius", spectral_radius(corner).value}});
    }
    r.document["verdict"] = "constructed";
    return true;
  }

  const CounterexampleReport report =
      verify_counterexample(pair, c.levels, triangularize_options(tol, c));
  for (const auto& lvl : report.levels) {
    OrderedJson row = {{"level", lvl.level},
                       {"block_size", lvl.block_size},
                       {"commutator_nilpotent", lvl.commutator_nilpotent}};
    row["word_spectrum_ok"] =
        lvl.word_spectrum_ok ? OrderedJson(*lvl.word_spectrum_ok) : OrderedJson(nullptr);
    row["word_spectrum_distance"] = lvl.word_spectrum_distance;
    row["corner_refuted"] =
        lvl.corner_refuted ? OrderedJson(*lvl.corner_refuted) : OrderedJson(nullptr);
    row["refuting_word"] =
        lvl.refuting_word ? OrderedJson(*lvl.refuting_word) : OrderedJson(nullptr);
    row["corner_commutator_radius"] = lvl.corner_commutator_radius;
    row["radius_zero"] = lvl.radius_zero;
    row["pass"] = lvl.pass;
    add_row(r, std::move(row));
  }
  OrderedJson failures = OrderedJson::array();
  for (const auto& f : report.failures) failures.push_back(f);
  r.document["failures"] = failures;
  r.document["verdict"] = report.all_pass ? "pass" : "fail";
  return report.all_pass;
}

bool run_decompose(const ExperimentConfig& c,
                   const std::map<std::string, double>& tol, Report& r) {
  ComplexMatrix t;
  if (c.random) {
    Rng rng(c.seed);
    const Index n =
        c.size.value_or(BlockSchedule::make(ScheduleKind::single, c.levels).total());
    t = random_complex_matrix(n, n, rng);
  } else {
    t = load_inputs(c, 1, 1)[0];
  }
  const DecompositionResult d = decompose(t, c.levels);
  const QuasinilpotentCertificate cert =
      quasinilpotent_part_certificate(d, c.levels, tol.at("radius"));

  const bool pass = d.residuals.reconstruction < tol.at("recon") &&
                    d.residuals.triangularity < tol.at("lower") &&
                    d.residuals.unitarity <= tol.at("unit") &&
                    cert.structure_ok &&
                    cert.report.verdict == ReportVerdict::certified_quasinilpotent;

  r.document["pipeline"] = "decompose";
  r.document["dimension"] = t.rows();
  r.document["schedule_sizes"] = sizes_json(d.schedule);
  r.document["t_norm"] = d.t_norm;
  r.document["residuals"] = {{"unitarity", d.residuals.unitarity},
                             {"triangularity", d.residuals.triangularity},
                             {"reconstruction", d.residuals.reconstruction}};
  r.document["certificate"] = {{"verdict", to_string(cert.report.verdict)},
                               {"structure_ok", cert.structure_ok},
                               {"tail_bound", cert.tail_bound},
                               {"scope", cert.report.scope}};
  for (int n = 1; n <= d.levels(); ++n) {
    OrderedJson row = {{"level", n},
                       {"size", d.schedule.size(n)},
                       {"delta_norm", operator_norm(d.delta_blocks[n - 1])},
                       {"q_block_norm",
                        n < d.levels() ? OrderedJson(operator_norm(d.q_blocks[n - 1]))
                                       : OrderedJson(nullptr)},
                       {"radius", cert.report.levels[n - 1].radius}};
    row["approximation_error"] =
        n < d.levels() ? OrderedJson(cert.approximation_error[n - 1])
                       : OrderedJson(nullptr);
    row["predicted_error"] = n < d.levels()
                                 ? OrderedJson(cert.predicted_error[n - 1])
                                 : OrderedJson(nullptr);
    add_row(r, std::move(row));
  }
  if (c.verify) r.document["u0"] = matrix_to_json(d.u0);
  r.document["verdict"] = pass ? "pass" : "fail";
  return pass;
}

bool run_stripped(const ExperimentConfig& c,
                  const std::map<std::string, double>& tol, Report& r) {
  const BlockSchedule schedule = BlockSchedule::make(c.schedule, c.levels);
  std::optional<BlockTridiagOperator> k1, k2;
  if (c.random) {
    Rng rng(c.seed);
    k1 = random_operator(schedule, rng);
    k2 = random_operator(schedule, rng);
  } else {
    auto ops = load_inputs(c, 2, 2);
    k1 = BlockTridiagOperator::from_dense(ops[0], schedule);
    k2 = BlockTridiagOperator::from_dense(ops[1], schedule);
  }
  const int word_len = c.word_len > 0 ? c.word_len : 4;
  const StrippedReport report =
      stripped_pair_checks(*k1, *k2, c.levels, tol.at("radius"), word_len);

  r.document["pipeline"] = "stripped-checks";
  r.document["schedule_sizes"] = sizes_json(schedule);
  r.document["word_len"] = report.word_len;
  for (const auto& lvl : report.levels)
    add_row(r, {{"level", lvl.level},
                {"max_word_radius", lvl.max_word_radius},
                {"diagonal_zero", lvl.diagonal_zero},
                {"trace_zero", lvl.trace_zero},
                {"trace_re", lvl.trace.real()},
                {"trace_im", lvl.trace.imag()},
                {"pass", lvl.pass}});
  r.document["verdict"] = report.all_pass ? "pass" : "fail";
  return report.all_pass;
}

int dispatch(ExperimentConfig c, std::ostream& out) {
  if (c.levels == 0) {
    const bool single = c.command == Command::decompose ||
                        c.schedule == ScheduleKind::single;
    c.levels = single ? 5 : 4;
  }
  if (c.levels < 1) throw UsageError("--levels must be >= 1");
  if (c.size && *c.size < 1) throw UsageError("--size must be >= 1");
  const auto tol = resolve_tolerances(c);

  ExperimentConfig echoed = c;
  echoed.tolerances = tol;
  Report r;
  r.document["config"] = config_to_json(echoed);

  bool pass = false;
  switch (c.command) {
    case Command::tridiagonalize: pass = run_tridiagonalize(c, tol, r); break;
    case Command::triangularize: pass = run_triangularize(c, tol, r); break;
    case Command::certify: pass = run_certify(c, tol, r); break;
    case Command::counterexample: pass = run_counterexample(c, tol, r); break;
    case Command::decompose: pass = run_decompose(c, tol, r); break;
    case Command::stripped_checks: pass = run_stripped(c, tol, r); break;
  }

  const std::string text = render(r, c.format);
  if (c.output)
    write_file_atomically(*c.output, text);
  else
    out << text;
  return pass ? exit_pass : exit_fail;
}

}  // namespace

const std::vector<std::string>& tolerance_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& entry : tolerance_defaults()) v.push_back(entry.first);
    return v;
  }();
  return names;
}

std::optional<Command> parse_command(const std::string& name) {
  static const std::pair<const char*, Command> table[] = {
      {"tridiagonalize", Command::tridiagonalize},
      {"triangularize", Command::triangularize},
      {"certify", Command::certify},
      {"counterexample", Command::counterexample},
      {"decompose", Command::decompose},
      {"stripped-checks", Command::stripped_checks},
  };
  for (const auto& [key, cmd] : table)
    if (name == key) return cmd;
  return std::nullopt;
}

const char* to_string(Command c) {
  switch (c) {
    case Command::tridiagonalize: return "tridiagonalize";
    case Command::triangularize: return "triangularize";
    case Command::certify: return "certify";
    case Command::counterexample: return "counterexample";
    case Command::decompose: return "decompose";
    case Command::stripped_checks: return "stripped-checks";
  }
  return "?";
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(config, out);
  } catch (const ParseError& e) {
    err << "error: malformed matrix file: " << e.what() << "\n";
    return exit_input;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const SchurFailure& e) {
    err << "error: " << e.what() << "\n";
    return exit_fail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  ExperimentConfig config;

  // --tol-<name> X and --tol-<name>=X are collected before CLI11 sees argv.
  std::vector<std::string> rest;
  const std::string prefix = "--tol-";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind(prefix, 0) != 0) {
      rest.push_back(arg);
      continue;
    }
    std::string name = arg.substr(prefix.size()), value;
    if (const auto eq = name.find('='); eq != std::string::npos) {
      value = name.substr(eq + 1);
      name.resize(eq);
    } else if (i + 1 < argc) {
      value = argv[++i];
    } else {
      err << "error: " << arg << " needs a value\n";
      return exit_usage;
    }
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0') {
      err << "error: " << arg << ": not a number: " << value << "\n";
      return exit_usage;
    }
    const auto& names = tolerance_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      err << "error: unknown tolerance --tol-" << name << "\n";
      return exit_usage;
    }
    config.tolerances[name] = x;
  }

  CLI::App app{"Block-tridiagonal operator experiments"};
  std::string command, schedule, format = "json", output;
  std::vector<std::string> inputs;
  Index size = 0;
  app.add_option("command", command,
                 "tridiagonalize | triangularize | certify | counterexample | "
                 "decompose | stripped-checks")
      ->required();
  app.add_option("inputs", inputs, "Matrix files");
  app.add_option("--levels", config.levels, "Number of schedule levels")
      ->check(CLI::PositiveNumber);
  app.add_option("--schedule", schedule, "pair | single")
      ->check(CLI::IsMember({"pair", "single"}));
  app.add_option("--seed", config.seed, "Seed for generated inputs and sampling");
  app.add_option("--format", format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", output, "Report path (stdout when omitted)");
  app.add_flag("--verify", config.verify, "Run the verification checks");
  app.add_flag("--counterexample", config.counterexample,
               "Use the built-in shift/corner pair");
  app.add_option("--word-len", config.word_len, "Maximum word length")
      ->check(CLI::PositiveNumber);
  app.add_flag("--random", config.random, "Generate seeded inputs");
  app.add_option("--size", size, "Dimension of generated dense inputs")
      ->check(CLI::PositiveNumber);
  app.add_flag("--padded", config.padded, "Pad levels to the standard schedule");
  app.footer("Tolerances: --tol-<name> X with name in {band, eig, kernel, "
             "lower, nil, radius, rank, recon, tri, unit}.");

  std::vector<std::string> reversed(rest.rbegin(), rest.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_pass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }

  const auto cmd = parse_command(command);
  if (!cmd) {
    err << "error: unknown command '" << command << "'\n";
    return exit_usage;
  }
  config.command = *cmd;
  for (const auto& p : inputs) config.inputs.emplace_back(p);
  if (!schedule.empty()) {
    config.schedule = schedule == "single" ? ScheduleKind::single : ScheduleKind::pair;
    config.schedule_given = true;
  }
  config.format = format == "csv" ? OutputFormat::csv : OutputFormat::json;
  if (!output.empty()) config.output = output;
  if (app.count("--size")) config.size = size;
  return run(config, out, err);
}

}  // namespace blocktri::cli
