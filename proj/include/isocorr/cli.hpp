#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isocorr/common.hpp"
#include "isocorr/estimation.hpp"
#include "isocorr/io.hpp"
#include "isocorr/selftest.hpp"

namespace isocorr {

// Exit codes: 0 success, 2 parse error, 3 validation error, 4 resource cap,
// 5 selftest/consistency failure. Verdicts are data, never exit codes.
struct CliResult {
  int exit_code = 0;
  std::string output;
  std::string error;
};

namespace cli_detail {

inline std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw parse_error("cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw parse_error("empty number list");
  return out;
}

inline std::vector<double> parse_grid(const std::string& text) {
  // "start:stop:step" inclusive grid, or a plain comma list.
  if (text.find(':') == std::string::npos) return parse_double_list(text);
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
    throw parse_error("grid must be start:stop:step");
  double start = 0, stop = 0, step = 0;
  try {
    start = std::stod(a);
    stop = std::stod(b);
    step = std::stod(c);
  } catch (const std::exception&) {
    throw parse_error("cannot parse grid '" + text + "'");
  }
  if (step <= 0 || stop < start) throw validation_error("grid needs step > 0 and stop >= start");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double p = start + k * step;
    if (p > stop + 1e-12) break;
    out.push_back(std::min(p, stop));
  }
  return out;
}

inline StateClass class_from_flags(const std::string& kind, int d, int L) {
  if (kind == "separable") return separable_class(d, L);
  if (kind == "bosonic") return bosonic_class(d, L);
  if (kind == "slater") return slater_class(d, L);
  if (kind == "gaussian") return gaussian_class(d);
  throw parse_error("unknown class kind '" + kind + "' (expected separable|bosonic|slater|gaussian)");
}

struct CommonFlags {
  std::string format = "json";
  std::string out_path;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  int threads = 1;
};

inline void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", f.out_path, "Write output to this path instead of stdout");
  sub->add_option("--seed", f.seed, "Master seed for all randomness");
  sub->add_option("--tol", f.tol, "Decision tolerance for the correlated verdict");
  sub->add_option("--threads", f.threads, "Worker threads (speed only, never results)")
      ->check(CLI::PositiveNumber);
}

struct ClassFlags {
  std::string kind;
  int d = 0;
  int L = 0;
};

inline void add_class(CLI::App* sub, ClassFlags& f, bool required = true) {
  auto* k = sub->add_option("--class", f.kind, "separable|bosonic|slater|gaussian");
  auto* d = sub->add_option("--d", f.d, "Single-particle dimension (modes for gaussian)");
  sub->add_option("--L", f.L, "Particle number (ignored for gaussian)");
  if (required) {
    k->required();
    d->required();
  }
}

inline std::string slater_example_rows(int d, const VectorXd& lambdas,
                                       const std::vector<double>& grid, double tol,
                                       const std::string& format) {
  const auto schmidt = make_two_fermion_schmidt(d, lambdas);
  const ProjectorA a = build_a(slater_class(d, 2));
  struct Row {
    double p, lhs, f;
    bool agree;
  };
  std::vector<Row> rows;
  for (double p : grid) {
    const double lhs = slater_criterion_lhs(schmidt, p);
    const double f = witness_value(a, depolarized_slater_state(schmidt, p), tol).f;
    rows.push_back({p, lhs, f, (f > tol) == (lhs - 3.0 > 0.0)});
  }
  if (format == "csv") {
    std::ostringstream out;
    out << "p,lhs,lhs_minus_3,f,agree\n";
    for (const auto& r : rows)
      out << format_double(r.p) << ',' << format_double(r.lhs) << ','
          << format_double(r.lhs - 3.0) << ',' << format_double(r.f) << ','
          << (r.agree ? "true" : "false") << '\n';
    return out.str();
  }
  JsonWriter w;
  w.begin_object();
  w.key("d").value(d);
  w.key("lambdas").begin_array();
  for (Index i = 0; i < lambdas.size(); ++i) w.value(lambdas[i]);
  w.end_array();
  w.key("rows").begin_array();
  for (const auto& r : rows) {
    w.begin_object();
    w.key("p").value(r.p);
    w.key("lhs").value(r.lhs);
    w.key("lhs_minus_3").value(r.lhs - 3.0);
    w.key("f").value(r.f);
    w.key("agree").value(r.agree);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline std::string params_output(const StateClass& cls, const std::string& format,
                                 const std::string& dump_a_path, bool& mismatch) {
  const Table1Row row = table1_parameters(cls);
  std::optional<ProjectorA> a;
  std::string warning;
  try {
    a = build_a(cls);
  } catch (const resource_error& e) {
    warning = std::string("numeric path unavailable: ") + e.what();
  }
  const double x_analytic = row.x();
  std::optional<double> x_numeric;
  if (a) {
    x_numeric = numeric_x(*a);
    mismatch = std::abs(*x_numeric - x_analytic) > 1e-9 * std::max(1.0, std::abs(x_analytic));
    if (!dump_a_path.empty()) {
      std::ofstream f(dump_a_path, std::ios::binary);
      if (!f) throw validation_error("cannot write operator dump to " + dump_a_path);
      f << operator_dump_json(a->matrix);
    }
  } else {
    mismatch = false;
  }

  if (format == "csv") {
    std::ostringstream out;
    out << "class,d,L,N,dim_sym2,x_analytic,one_minus_x,P_cr,x_numeric,trace_a,warning\n"
        << kind_name(cls.kind) << ',' << cls.d << ',' << cls.L << ',' << row.n << ','
        << dim_sym2(row.n) << ',' << format_double(x_analytic) << ','
        << format_double(row.one_minus_x) << ',' << format_double(row.p_cr()) << ','
        << (x_numeric ? format_double(*x_numeric) : "") << ','
        << (a ? format_double(a->trace) : "") << ',' << warning << '\n';
    return out.str();
  }
  JsonWriter w;
  w.begin_object();
  w.key("class");
  write_class(w, cls);
  w.key("N").value(row.n);
  w.key("dim_sym2").value(dim_sym2(row.n));
  w.key("x_analytic").value(x_analytic);
  w.key("one_minus_x").value(row.one_minus_x);
  w.key("P_cr").value(row.p_cr());
  if (x_numeric) {
    w.key("x_numeric").value(*x_numeric);
    w.key("trace_a").value(a->trace);
    w.key("x_agreement").value(!mismatch);
  }
  if (cls.kind == ClassKind::Gaussian && x_analytic == 0.0)
    w.key("note").value(std::string("witness trivial: A = 0, every state undetectable"));
  if (!warning.empty()) w.key("warning").value(warning);
  w.end_object();
  return w.str();
}

}  // namespace cli_detail

inline CliResult run_cli(std::vector<std::string> args) {
  using namespace cli_detail;
  CLI::App app{"correlation witnesses and isospectral-orbit statistics"};
  app.require_subcommand(1);

  ClassFlags params_class, witness_class, fraction_class;
  CommonFlags params_common, witness_common, fraction_common, slater_common, selftest_common;
  std::string dump_a_path, state_path, spectrum_text, lambdas_text = "1";
  double depolarized = -1.0;
  std::int64_t n_samples = 10000;
  std::string p_grid_text = "0:1:0.05";
  int slater_d = 4;
  std::string level_text = "quick";

  auto* params = app.add_subcommand("params", "Class parameters: N, X, P_cr, tr A");
  add_class(params, params_class);
  add_common(params, params_common);
  params->add_option("--dump-a", dump_a_path, "Write the dense A operator as JSON");

  auto* witness = app.add_subcommand("witness", "Evaluate the quadratic witness on a state file");
  add_class(witness, witness_class, false);
  add_common(witness, witness_common);
  witness->add_option("--state", state_path, "State file (JSON)")->required();

  auto* fraction =
      app.add_subcommand("fraction", "Monte Carlo fraction of detected states on an orbit");
  add_class(fraction, fraction_class);
  add_common(fraction, fraction_common);
  fraction->add_option("--spectrum", spectrum_text, "Comma-separated orbit spectrum");
  fraction->add_option("--depolarized-spectrum", depolarized,
                       "Spectrum ((1-p)+p/N, p/N x (N-1)) for this p");
  fraction->add_option("--samples", n_samples, "Number of Haar samples")
      ->check(CLI::PositiveNumber);
  std::string dump_states_path;
  fraction->add_option("--dump-states", dump_states_path,
                       "Also write the sampled states as a JSON array of state files");

  auto* slater = app.add_subcommand("slater-example", "Depolarized two-fermion family table");
  add_common(slater, slater_common);
  slater->add_option("--d", slater_d, "Single-particle dimension");
  slater->add_option("--lambdas", lambdas_text, "Comma-separated Schmidt coefficients");
  slater->add_option("--p-grid", p_grid_text, "start:stop:step or comma list");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in check suite");
  add_common(selftest, selftest_common);
  selftest->add_option("--level", level_text, "quick|full")
      ->check(CLI::IsMember({"quick", "full"}));

  CliResult result;
  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (params->parsed()) {
      const StateClass cls = class_from_flags(params_class.kind, params_class.d, params_class.L);
      validate(cls);
      bool mismatch = false;
      result.output = params_output(cls, params_common.format, dump_a_path, mismatch);
      if (mismatch) result.exit_code = 5;
    } else if (witness->parsed()) {
      const DensityMatrix dm = read_state_file(state_path);
      if (!witness_class.kind.empty()) {
        const StateClass flag_cls =
            class_from_flags(witness_class.kind, witness_class.d, witness_class.L);
        if (!(flag_cls == dm.cls))
          throw validation_error("state file class " + to_string(dm.cls) +
                                 " does not match --class flags " + to_string(flag_cls));
      }
      const ProjectorA a = build_a(dm.cls);
      const WitnessReport rep = witness_value(a, dm, witness_common.tol);
      result.output = witness_common.format == "csv" ? witness_report_csv(rep)
                                                     : witness_report_json(rep);
    } else if (fraction->parsed()) {
      const StateClass cls =
          class_from_flags(fraction_class.kind, fraction_class.d, fraction_class.L);
      validate(cls);
      if (spectrum_text.empty() == (depolarized < 0.0))
        throw validation_error("give exactly one of --spectrum or --depolarized-spectrum");
      Spectrum spec;
      if (spectrum_text.empty()) {
        spec = depolarized_spectrum(dim_space(cls), depolarized);
      } else {
        const auto list = parse_double_list(spectrum_text);
        spec = make_spectrum(
            Eigen::Map<const VectorXd>(list.data(), static_cast<Index>(list.size())));
      }
      const FractionEstimate est =
          estimate_fraction(cls, spec, n_samples, fraction_common.seed, fraction_common.threads,
                            fraction_common.tol);
      result.output =
          fraction_common.format == "csv" ? fraction_csv(est) : fraction_json(est);
      if (!dump_states_path.empty()) {
        std::ofstream f(dump_states_path, std::ios::binary);
        if (!f) throw validation_error("cannot write state dump to " + dump_states_path);
        f << '[';
        for (std::int64_t i = 0; i < n_samples; ++i) {
          RandomStream stream(fraction_common.seed, static_cast<std::uint64_t>(i));
          if (i) f << ',';
          f << state_json(isospectral_sample(cls, spec, stream));
        }
        f << "]";
      }
    } else if (slater->parsed()) {
      const auto lam_list = parse_double_list(lambdas_text);
      const VectorXd lambdas =
          Eigen::Map<const VectorXd>(lam_list.data(), static_cast<Index>(lam_list.size()));
      result.output = slater_example_rows(slater_d, lambdas, parse_grid(p_grid_text),
                                          slater_common.tol, slater_common.format);
    } else if (selftest->parsed()) {
      const SelftestLevel level =
          level_text == "full" ? SelftestLevel::Full : SelftestLevel::Quick;
      const SelftestReport rep = run_selftest(level, selftest_common.seed);
      result.output = selftest_json(rep);
      if (!rep.pass()) result.exit_code = 5;
    }

    const std::string& out_path = params->parsed()    ? params_common.out_path
                                  : witness->parsed() ? witness_common.out_path
                                  : fraction->parsed() ? fraction_common.out_path
                                  : slater->parsed()   ? slater_common.out_path
                                                       : selftest_common.out_path;
    if (!out_path.empty() && !result.output.empty()) {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw validation_error("cannot write output to " + out_path);
      f << result.output;
      result.output.clear();
    }
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream help;
    app.exit(e, help, help);
    result.output = help.str();
  } catch (const CLI::ParseError& e) {
    result.exit_code = 2;
    result.error = e.what();
  } catch (const parse_error& e) {
    result.exit_code = 2;
    result.error = e.what();
  } catch (const validation_error& e) {
    result.exit_code = 3;
    result.error = e.what();
  } catch (const resource_error& e) {
    result.exit_code = 4;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.error = e.what();
  }
  return result;
}

}  // namespace isocorr
