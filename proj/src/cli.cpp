#include "ppscert/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ppscert/certificate.hpp"
#include "ppscert/errors.hpp"
#include "ppscert/ovi.hpp"
#include "ppscert/ppda.hpp"
#include "ppscert/pps_parser.hpp"
#include "ppscert/program.hpp"
#include "ppscert/translate.hpp"

namespace ppscert {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw InputError("cannot write '" + path + "'");
}

std::string extension(const std::string& path) { return path == "-" ? ".pps" : fs::path(path).extension().string(); }

struct Flags {
  std::string epsilon = "1/1000";
  double c = 0.1;
  double d = 0.5;
  int max_guesses = 10;
  std::string strategy = "eigenvector";
  std::string update = "gauss-seidel";
  int kmax = 10;
  bool assume_ast = false;
  std::string bad_state;
  std::string reward;
  bool normalize_arity = false;
  std::string report = "text";
  std::string report_file;
  std::string output;
  unsigned jobs = 1;
  long max_int = 255;
  std::size_t max_symbols = 1'000'000;
};

OviParams params_from(const Flags& f) {
  OviParams p;
  try {
    p.epsilon = parse_rational(f.epsilon);
  } catch (const std::invalid_argument&) {
    throw InputError("malformed --epsilon '" + f.epsilon + "'");
  }
  p.c = f.c;
  p.d = f.d;
  p.max_guess_rounds = f.max_guesses;
  p.strategy = f.strategy == "relative" ? GuessStrategy::Relative : GuessStrategy::Eigenvector;
  p.update = f.update == "kleene" ? UpdateKind::Kleene : UpdateKind::GaussSeidel;
  p.k_max = f.kmax;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return p;
}

struct Model {
  std::string kind;  // pps, ppda, ppl
  PolySystem system;
  std::optional<Ppda> ppda;
  std::optional<Config> init;
  std::map<StateId, std::string> main_values;
};

Model load_model(const std::string& path, const Flags& f, bool for_reward) {
  const std::string ext = extension(path);
  const std::string text = read_file(path);
  Model m;
  if (ext == ".pps") {
    m.kind = "pps";
    m.system = parse_pps(text);
    if (!f.bad_state.empty() || !f.reward.empty()) throw InputError("--bad-state and --reward need a .ppda or .ppl input");
    return m;
  }
  if (ext == ".ppda") {
    m.kind = "ppda";
    m.ppda = parse_ppda(text);
    m.init = m.ppda->initial();
  } else if (ext == ".ppl") {
    m.kind = "ppl";
    Program prog = parse_program(text, ProgramOptions{f.max_int});
    Translation t = translate(prog, TranslateOptions{f.max_symbols});
    m.ppda = std::move(t.ppda);
    m.init = t.init;
    m.main_values = std::move(t.main_values);
  } else {
    throw InputError("unknown input type '" + ext + "' (expected .pps, .ppda or .ppl)");
  }
  if (!f.bad_state.empty()) {
    try {
      m.ppda = bad_state_transform(*m.ppda, f.bad_state);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  if (for_reward && f.normalize_arity) m.ppda = normalize_arity(*m.ppda);
  m.system = return_pps(*m.ppda).first;
  return m;
}

double average_digits(const Certificate& cert) {
  if (cert.upper.empty()) return 0.0;
  double total = 0.0;
  for (const Rational& r : cert.upper) {
    total += static_cast<double>(decimal_digits(r.get_num()) + decimal_digits(r.get_den()));
  }
  return total / static_cast<double>(cert.upper.size());
}

std::string decimal(const Rational& r) {
  std::ostringstream s;
  s << std::setprecision(10) << r.get_d();
  return s.str();
}

ordered_json solve_stats(const SolveResult& res) {
  ordered_json sccs = ordered_json::array();
  int guesses = 0;
  std::uint64_t steps = 0, power = 0;
  for (const SccReport& r : res.sccs) {
    guesses += r.guesses;
    steps += r.lower_steps;
    power += r.power_iterations;
    sccs.push_back({{"index", r.index},
                    {"size", r.size},
                    {"trivial", r.trivial},
                    {"guesses", r.guesses},
                    {"lower_steps", r.lower_steps},
                    {"power_iterations", r.power_iterations},
                    {"k", r.k_used},
                    {"retries", r.retries},
                    {"gap", r.gap},
                    {"rho_estimate", r.rho_estimate},
                    {"exact_ms", r.exact_ms},
                    {"time_ms", r.total_ms}});
  }
  ordered_json j;
  j["variables"] = res.certificate.upper.size();
  j["zero_variables"] = res.zero_variables;
  j["scc_count"] = res.sccs.size();
  std::size_t nontrivial = 0, largest = 0;
  for (const SccReport& r : res.sccs) {
    nontrivial += r.trivial ? 0 : 1;
    largest = std::max(largest, r.size);
  }
  j["nontrivial_sccs"] = nontrivial;
  j["largest_scc"] = largest;
  j["totals"] = {{"guesses", guesses},
                 {"lower_steps", steps},
                 {"power_iterations", power},
                 {"k", res.certificate.k_used},
                 {"gap", res.gap},
                 {"time_ms", res.total_ms},
                 {"exact_ms", res.exact_ms},
                 {"t_Q_percent", res.total_ms > 0 ? 100.0 * res.exact_ms / res.total_ms : 0.0},
                 {"D", average_digits(res.certificate)}};
  j["sccs"] = std::move(sccs);
  return j;
}

ordered_json failure(const SolveError& e) {
  ordered_json j;
  j["outcome"] = std::string(to_string(e.outcome()));
  j["message"] = e.what();
  if (e.scc()) j["failing_scc"] = *e.scc();
  if (auto* g = dynamic_cast<const GuessBudgetExhausted*>(&e); g && g->spectral_radius_estimate() >= 0) {
    j["rho_estimate"] = g->spectral_radius_estimate();
  }
  return j;
}

void print_report(std::ostream& out, const ordered_json& r, const std::string& format) {
  if (format == "json") {
    out << r.dump(2) << '\n';
    return;
  }
  out << "outcome: " << r.value("outcome", "?") << '\n';
  if (r.contains("message")) out << "reason: " << r["message"].get<std::string>() << '\n';
  if (r.contains("failing_scc")) out << "failing scc: " << r["failing_scc"] << '\n';
  if (r.contains("rho_estimate")) out << "spectral radius estimate: " << r["rho_estimate"] << '\n';
  if (r.contains("model")) {
    const auto& m = r["model"];
    out << "model: |Q|=" << m["states"] << " |Gamma|=" << m["symbols"] << " rules=" << m["rules"] << '\n';
  }
  if (r.contains("stats")) {
    const auto& s = r["stats"];
    const auto& t = s["totals"];
    out << "variables: " << s["variables"] << " (zero: " << s["zero_variables"] << ")  sccs: " << s["scc_count"]
        << " (nontrivial: " << s["nontrivial_sccs"] << ", largest: " << s["largest_scc"] << ")\n";
    out << "G: " << t["guesses"] << "  k: " << t["k"] << "  D: " << std::fixed << std::setprecision(2)
        << t["D"].get<double>() << "  t_Q: " << t["t_Q_percent"].get<double>() << "%  time: "
        << t["time_ms"].get<double>() << " ms\n";
    out.unsetf(std::ios::floatfield);
  }
  if (r.contains("certificate")) out << "certificate: " << r["certificate"].get<std::string>() << '\n';
  if (r.contains("verified")) out << "independent check: " << (r["verified"].get<bool>() ? "valid" : "INVALID") << '\n';
  if (r.contains("bounds")) {
    out << "bounds:\n";
    for (const auto& b : r["bounds"]) {
      out << "  " << b["label"].get<std::string>() << ": [" << b["lower_decimal"].get<std::string>() << ", "
          << b["upper_decimal"].get<std::string>() << "]  upper = " << b["upper"].get<std::string>() << '\n';
    }
  }
  if (r.contains("termination_upper")) {
    out << "termination probability <= " << r["termination_upper"].get<std::string>() << '\n';
  }
  if (r.contains("reward")) {
    const auto& w = r["reward"];
    out << "expected reward: outcome " << w.value("outcome", "?");
    if (w.contains("upper")) out << ", <= " << w["upper"].get<std::string>() << " (" << w["upper_decimal"].get<std::string>() << ")";
    if (w.contains("message")) out << ": " << w["message"].get<std::string>();
    out << '\n';
  }
  if (r.contains("error")) out << "error: " << r["error"].get<std::string>() << '\n';
}

std::string default_output(const std::string& input) {
  if (input == "-") return {};
  return input + ".cert";
}

// Runs the pipeline; returns the exit code and fills the report.
int certify(const std::string& input, const Flags& f, ordered_json& report, bool write_outputs) {
  const OviParams params = params_from(f);
  Model m = load_model(input, f, !f.reward.empty());
  report["input"] = input;
  report["kind"] = m.kind;
  report["strategy"] = std::string(to_string(params.strategy));
  if (m.ppda) {
    report["model"] = {{"states", m.ppda->state_count()},
                       {"symbols", m.ppda->symbol_count()},
                       {"rules", m.ppda->rule_count()}};
  }

  SolveResult res;
  try {
    res = solve(m.system, params, f.jobs);
  } catch (const SolveError& e) {
    const ordered_json why = failure(e);
    for (auto& [k, v] : why.items()) report[k] = v;
    return 1;
  } catch (const BudgetExhausted& e) {
    report["outcome"] = std::string(to_string(Outcome::GuessBudgetExhausted));
    report["message"] = e.what();
    return 1;
  }
  report["outcome"] = std::string(to_string(Outcome::Certified));
  report["stats"] = solve_stats(res);
  const Certificate& cert = res.certificate;
  const Verdict verdict = verify_certificate_file(m.system, cert);
  report["verified"] = verdict.valid;

  const std::string out_path = f.output.empty() ? default_output(input) : f.output;
  if (write_outputs && !out_path.empty()) {
    write_file(out_path, to_text(cert));
    report["certificate"] = out_path;
  }

  if (m.ppda && m.init) {
    const Ppda& a = *m.ppda;
    ReturnVarIndex index(a.state_count(), a.symbol_count());
    ordered_json bounds = ordered_json::array();
    try {
      auto dist = output_distribution_bounds(a, *m.init, cert, f.assume_ast);
      Rational total;
      for (auto& [r, iv] : dist) {
        std::string label = a.state_name(r);
        if (auto it = m.main_values.find(r); it != m.main_values.end()) label = "main returns " + it->second;
        if (!f.bad_state.empty() && a.state_name(r) == f.bad_state) label = "reach " + f.bad_state;
        if (sgn(iv.upper) == 0 && !m.main_values.count(r)) continue;
        total += iv.upper;
        bounds.push_back({{"state", a.state_name(r)},
                          {"label", label},
                          {"lower", to_fraction_string(iv.lower)},
                          {"upper", to_fraction_string(iv.upper)},
                          {"lower_decimal", decimal(iv.lower)},
                          {"upper_decimal", decimal(iv.upper)}});
      }
      report["bounds"] = std::move(bounds);
      report["termination_upper"] = decimal(total);
    } catch (const SlackNegative& e) {
      report["error"] = e.what();
    }

    if (!f.reward.empty()) {
      ordered_json w;
      RewardModel model = parse_reward(read_file(f.reward), a);
      auto [rsys, rindex] = [&] {
        try {
          return reward_pps(a, model, cert);
        } catch (const ArityViolation& e) {
          throw InputError(std::string(e.what()));
        }
      }();
      try {
        SolveResult rres = solve(rsys, params, f.jobs);
        Rational total;
        for (StateId r = 0; r < a.state_count(); ++r) {
          total += rres.certificate.upper[rindex.var(m.init->state, m.init->symbol, r)];
        }
        w["outcome"] = std::string(to_string(Outcome::Certified));
        w["upper"] = to_fraction_string(total);
        w["upper_decimal"] = decimal(total);
        w["verified"] = verify_certificate_file(rsys, rres.certificate).valid;
        if (write_outputs && !out_path.empty()) {
          write_file(out_path + ".reward", to_text(rres.certificate));
          w["certificate"] = out_path + ".reward";
        }
      } catch (const SolveError& e) {
        w = failure(e);
      }
      report["reward"] = w;
      if (w["outcome"] != "Certified") return 1;
    }
  }
  return verdict.valid ? 0 : 1;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
  } catch (const TranslateError& e) {
    err << "translation error: " << e.what() << '\n';
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
  }
  return 2;
}

void add_solver_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--epsilon", f.epsilon, "guess offset epsilon (decimal or n/d)")->capture_default_str();
  cmd->add_option("--c", f.c, "tolerance shrink factor")->capture_default_str();
  cmd->add_option("--d", f.d, "guess shrink factor")->capture_default_str();
  cmd->add_option("--max-guesses", f.max_guesses, "guess rounds per SCC")->capture_default_str();
  cmd->add_option("--strategy", f.strategy)->check(CLI::IsMember({"eigenvector", "relative"}))->capture_default_str();
  cmd->add_option("--update", f.update)->check(CLI::IsMember({"gauss-seidel", "kleene"}))->capture_default_str();
  cmd->add_option("--kmax", f.kmax, "maximal k-induction depth")->capture_default_str();
  cmd->add_option("--jobs", f.jobs, "threads for independent SCCs")->capture_default_str();
  cmd->add_option("--max-int", f.max_int, "pPL int domain is 0..max-int")->capture_default_str();
  cmd->add_option("--max-symbols", f.max_symbols, "translation cap on stack symbols")->capture_default_str();
  cmd->add_option("--report", f.report)->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  cmd->add_option("--report-file", f.report_file, "write the report here instead of stdout");
}

void emit_report(const ordered_json& report, const Flags& f, std::ostream& out) {
  if (f.report_file.empty()) {
    print_report(out, report, f.report);
  } else {
    std::ostringstream s;
    print_report(s, report, f.report);
    write_file(f.report_file, s.str());
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"certified upper bounds for positive polynomial systems and probabilistic pushdown automata"};
  app.require_subcommand(1);
  Flags f;

  std::string input;
  auto* certify_cmd = app.add_subcommand("certify", "compute and verify an inductive upper bound");
  certify_cmd->add_option("input", input, ".pps, .ppda or .ppl file ('-' reads a .pps from stdin)")->required();
  certify_cmd->add_option("-o,--output", f.output, "certificate path (default <input>.cert)");
  certify_cmd->add_flag("--assume-ast", f.assume_ast, "derive lower bounds assuming almost-sure termination");
  certify_cmd->add_option("--bad-state", f.bad_state, "bound the probability of reaching this pPDA state");
  certify_cmd->add_option("--reward", f.reward, "reward file (`state value` lines) for expected rewards");
  certify_cmd->add_flag("--normalize-arity", f.normalize_arity, "rewrite one-symbol pushes before --reward");
  add_solver_flags(certify_cmd, f);

  std::string system_path, cert_path;
  auto* check_cmd = app.add_subcommand("check", "verify a certificate in exact arithmetic");
  check_cmd->add_option("system", system_path, ".pps, .ppda or .ppl file")->required();
  check_cmd->add_option("certificate", cert_path)->required();
  check_cmd->add_option("--bad-state", f.bad_state, "the system was transformed for this bad state");
  check_cmd->add_option("--max-int", f.max_int)->capture_default_str();

  std::string program_path;
  auto* translate_cmd = app.add_subcommand("translate", "emit the pPDA and return system of a program");
  translate_cmd->add_option("program", program_path, ".ppl file")->required();
  translate_cmd->add_option("-o,--output", f.output, "output prefix (default: input without .ppl)");
  translate_cmd->add_option("--max-int", f.max_int)->capture_default_str();
  translate_cmd->add_option("--max-symbols", f.max_symbols)->capture_default_str();

  std::vector<std::string> compare_inputs;
  auto* compare_cmd = app.add_subcommand("compare", "run both guess strategies and compare outcomes");
  compare_cmd->add_option("inputs", compare_inputs)->required();
  add_solver_flags(compare_cmd, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (*certify_cmd) {
    return guarded(err, [&] {
      ordered_json report;
      const int code = certify(input, f, report, true);
      emit_report(report, f, out);
      return code;
    });
  }

  if (*check_cmd) {
    return guarded(err, [&] {
      Model m = load_model(system_path, f, false);
      const Certificate cert = parse_certificate(read_file(cert_path));
      const Verdict v = verify_certificate_file(m.system, cert);
      if (v.valid) {
        out << "valid\n";
        return 0;
      }
      out << "invalid: " << v.reason;
      if (v.failing) out << " (coordinate " << m.system.name(*v.failing) << ")";
      out << '\n';
      return 1;
    });
  }

  if (*translate_cmd) {
    return guarded(err, [&] {
      if (extension(program_path) != ".ppl") throw InputError("translate expects a .ppl program");
      Program prog = parse_program(read_file(program_path), ProgramOptions{f.max_int});
      Translation t = translate(prog, TranslateOptions{f.max_symbols});
      std::string prefix = f.output;
      if (prefix.empty()) prefix = (fs::path(program_path).parent_path() / fs::path(program_path).stem()).string();
      PolySystem sys = return_pps(t.ppda).first;
      write_file(prefix + ".ppda", to_text(t.ppda));
      write_file(prefix + ".pps", to_text(sys));
      const CleanResult cleaned = clean(sys);
      const DepGraph g = dep_graph(cleaned.system);
      std::size_t nontrivial = 0;
      for (std::size_t s = 0; s < g.sccs.size(); ++s) nontrivial += g.is_trivial(s) ? 0 : 1;
      out << "wrote " << prefix << ".ppda (|Q|=" << t.ppda.state_count() << ", |Gamma|=" << t.ppda.symbol_count()
          << ", rules=" << t.ppda.rule_count() << ")\n";
      out << "wrote " << prefix << ".pps (vars=" << sys.size() << ", terms=" << sys.term_count()
          << ", clean vars=" << cleaned.system.size() << ", nontrivial sccs=" << nontrivial << ")\n";
      return 0;
    });
  }

  return guarded(err, [&] {
    ordered_json rows = ordered_json::array();
    bool subset = true;
    for (const std::string& in : compare_inputs) {
      ordered_json row{{"input", in}};
      bool ok[2] = {false, false};
      const char* names[2] = {"eigenvector", "relative"};
      for (int s = 0; s < 2; ++s) {
        Flags g = f;
        g.strategy = names[s];
        g.output.clear();
        ordered_json r;
        ok[s] = certify(in, g, r, false) == 0;
        ordered_json cell{{"outcome", r.value("outcome", "?")}};
        if (r.contains("stats")) {
          cell["G"] = r["stats"]["totals"]["guesses"];
          cell["D"] = r["stats"]["totals"]["D"];
          cell["time_ms"] = r["stats"]["totals"]["time_ms"];
        }
        row[names[s]] = cell;
      }
      if (ok[1] && !ok[0]) subset = false;
      rows.push_back(row);
    }
    ordered_json report{{"rows", rows}, {"relative_subset_of_eigenvector", subset}};
    if (f.report == "json") {
      out << report.dump(2) << '\n';
    } else {
      out << std::left << std::setw(28) << "input" << std::setw(24) << "eigenvector" << std::setw(6) << "G"
          << std::setw(24) << "relative" << "G\n";
      for (const auto& row : rows) {
        auto g = [](const ordered_json& c) { return c.contains("G") ? c["G"].dump() : std::string("-"); };
        out << std::left << std::setw(28) << fs::path(row["input"].get<std::string>()).filename().string()
            << std::setw(24) << row["eigenvector"]["outcome"].get<std::string>() << std::setw(6)
            << g(row["eigenvector"]) << std::setw(24) << row["relative"]["outcome"].get<std::string>()
            << g(row["relative"]) << '\n';
      }
      out << "relative successes within eigenvector successes: " << (subset ? "yes" : "NO") << '\n';
    }
    return subset ? 0 : 1;
  });
}

}  // namespace ppscert
