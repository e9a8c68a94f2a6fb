#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isocorr/common.hpp"
#include "isocorr/estimation.hpp"
#include "isocorr/spaces.hpp"
#include "isocorr/witness.hpp"

namespace isocorr {

// All numeric output goes through this: 17 significant digits, fixed format,
// so identical inputs give byte-identical files.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Minimal ordered JSON emitter for output paths (parsing uses nlohmann).
class JsonWriter {
 public:
  JsonWriter& key(const std::string& k) {
    sep();
    out_ << '"' << k << "\":";
    pending_value_ = true;
    return *this;
  }
  JsonWriter& value(double v) { return raw(format_double(v)); }
  JsonWriter& value(std::int64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(const std::string& s) {
    std::string esc;
    for (char c : s) {
      if (c == '"' || c == '\\') esc += '\\';
      esc += c;
    }
    return raw('"' + esc + '"');
  }
  JsonWriter& begin_object() { return raw("{", true); }
  JsonWriter& end_object() {
    out_ << '}';
    depth_first_.pop_back();
    return *this;
  }
  JsonWriter& begin_array() { return raw("[", true); }
  JsonWriter& end_array() {
    out_ << ']';
    depth_first_.pop_back();
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  JsonWriter& raw(const std::string& s, bool opens = false) {
    if (!pending_value_) sep();
    pending_value_ = false;
    out_ << s;
    if (opens) depth_first_.push_back(true);
    return *this;
  }
  void sep() {
    if (!depth_first_.empty()) {
      if (!depth_first_.back()) out_ << ',';
      depth_first_.back() = false;
    }
  }
  std::ostringstream out_;
  std::vector<bool> depth_first_;
  bool pending_value_ = false;
};

inline void write_class(JsonWriter& w, const StateClass& c) {
  w.begin_object();
  w.key("kind").value(kind_name(c.kind));
  w.key("d").value(c.d);
  if (c.kind != ClassKind::Gaussian) w.key("L").value(c.L);
  w.end_object();
}

// ---------------------------------------------------------------------------
// Parsing

inline StateClass class_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("d"))
    throw parse_error("class descriptor needs 'kind' and 'd'");
  const std::string kind = j.at("kind").get<std::string>();
  const int d = j.at("d").get<int>();
  if (kind == "gaussian") return gaussian_class(d);
  if (!j.contains("L")) throw parse_error("class descriptor needs 'L' for kind " + kind);
  const int L = j.at("L").get<int>();
  if (kind == "separable") return separable_class(d, L);
  if (kind == "bosonic") return bosonic_class(d, L);
  if (kind == "slater") return slater_class(d, L);
  throw parse_error("unknown class kind '" + kind + "'");
}

// State file: {"class": {...}, "dim": N, "rho": [[re,im], ...] row-major}.
inline DensityMatrix read_state_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("state file is not valid JSON: ") + e.what());
  }
  StateClass cls{};
  Index dim = 0;
  try {
    cls = class_from_json(j.at("class"));
    dim = j.at("dim").get<Index>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("state file is missing fields: ") + e.what());
  }
  if (!j.contains("rho") || !j.at("rho").is_array())
    throw parse_error("state file needs a 'rho' array");
  const auto& rows = j.at("rho");
  if (static_cast<Index>(rows.size()) != dim * dim)
    throw validation_error("state file: 'rho' must hold dim^2 [re,im] pairs");
  MatrixXcd rho(dim, dim);
  for (Index k = 0; k < dim * dim; ++k) {
    const auto& pair = rows.at(static_cast<std::size_t>(k));
    if (!pair.is_array() || pair.size() != 2)
      throw parse_error("state file: each rho entry must be an [re,im] pair");
    rho(k / dim, k % dim) = cxd(pair.at(0).get<double>(), pair.at(1).get<double>());
  }
  return make_density_matrix(cls, std::move(rho));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline DensityMatrix read_state_file(const std::string& path) {
  return read_state_json(read_file(path));
}

// ---------------------------------------------------------------------------
// Emitters

inline std::string state_json(const DensityMatrix& dm) {
  JsonWriter w;
  w.begin_object();
  w.key("class");
  write_class(w, dm.cls);
  w.key("dim").value(dm.dim());
  w.key("rho").begin_array();
  for (Index i = 0; i < dm.dim(); ++i)
    for (Index j = 0; j < dm.dim(); ++j) {
      w.begin_array();
      w.value(dm.rho(i, j).real());
      w.value(dm.rho(i, j).imag());
      w.end_array();
    }
  w.end_array();
  w.end_object();
  return w.str();
}

// Operator dump: {"dim": n, "rows": [[re, im], ...] row-major}.
inline std::string operator_dump_json(const MatrixXcd& m) {
  JsonWriter w;
  w.begin_object();
  w.key("dim").value(m.rows());
  w.key("rows").begin_array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      w.begin_array();
      w.value(m(i, j).real());
      w.value(m(i, j).imag());
      w.end_array();
    }
  w.end_array();
  w.end_object();
  return w.str();
}

inline std::string witness_report_json(const WitnessReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("f").value(r.f);
  w.key("purity").value(r.purity);
  w.key("verdict").value(r.correlated ? std::string("correlated") : std::string("undetected"));
  w.key("class");
  write_class(w, r.cls);
  w.key("decision_tol").value(r.decision_tol);
  w.end_object();
  return w.str();
}

inline constexpr const char* kWitnessCsvHeader = "f,purity,verdict,class,d,L";

inline std::string witness_report_csv(const WitnessReport& r) {
  std::ostringstream out;
  out << kWitnessCsvHeader << '\n'
      << format_double(r.f) << ',' << format_double(r.purity) << ','
      << (r.correlated ? "correlated" : "undetected") << ',' << kind_name(r.cls.kind) << ','
      << r.cls.d << ',' << r.cls.L << '\n';
  return out.str();
}

// Fixed, versioned sweep columns.
inline constexpr const char* kFractionCsvHeader =
    "class,d,L,purity,P_cr,X,N,n_samples,fraction,std_err,bound,mean_f,seed";

inline std::string fraction_csv_row(const FractionEstimate& e) {
  std::ostringstream out;
  out << kind_name(e.cls.kind) << ',' << e.cls.d << ',' << e.cls.L << ','
      << format_double(e.params.purity) << ',' << format_double(e.params.p_cr) << ','
      << format_double(e.params.x) << ',' << e.params.n << ',' << e.n_samples << ','
      << format_double(e.fraction) << ',' << format_double(e.std_err) << ','
      << format_double(e.bound) << ',' << format_double(e.mean_f_empirical) << ',' << e.seed;
  return out.str();
}

inline std::string fraction_csv(const FractionEstimate& e) {
  return std::string(kFractionCsvHeader) + "\n" + fraction_csv_row(e) + "\n";
}

inline std::string fraction_json(const FractionEstimate& e) {
  JsonWriter w;
  w.begin_object();
  w.key("class");
  write_class(w, e.cls);
  w.key("purity").value(e.params.purity);
  w.key("P_cr").value(e.params.p_cr);
  w.key("X").value(e.params.x);
  w.key("N").value(e.params.n);
  w.key("n_samples").value(e.n_samples);
  w.key("fraction").value(e.fraction);
  w.key("std_err").value(e.std_err);
  w.key("bound").value(e.bound);
  w.key("bound_applicable").value(e.bound_applicable);
  w.key("mean_f").value(e.mean_f_empirical);
  w.key("mean_f_analytic").value(e.mean_f_analytic);
  w.key("seed").value(e.seed);
  w.key("spectrum").begin_array();
  for (Index i = 0; i < e.spec.size(); ++i) w.value(e.spec.p[i]);
  w.end_array();
  w.end_object();
  return w.str();
}

}  // namespace isocorr
