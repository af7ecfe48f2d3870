#include "piag/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace piag::io {

ParseError::ParseError(std::size_t line, const std::string& message)
    : InvalidArgument(line > 0 ? "line " + std::to_string(line) + ": " + message
                               : message),
      line_(line) {}

namespace {

// 1-based line of the first occurrence of "key" in the raw text, 0 if absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  Json parse() const {
    try {
      return Json::parse(text_);
    } catch (const Json::parse_error& e) {
      // nlohmann reports "... at line L, column C: ..." for syntax errors.
      std::size_t line = 0;
      const std::string what = e.what();
      const std::size_t at = what.find("line ");
      if (at != std::string::npos) line = std::stoul(what.substr(at + 5));
      throw ParseError(line, std::string("syntax error: ") + e.what());
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ParseError(line_of_key(text_, key), msg);
  }

  void only(const Json& obj, const std::string& where,
            std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(where, where + " must be a JSON object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
      if (!keys.count(key)) fail(key, "unknown field '" + key + "' in " + where);
    }
  }

  double number(const Json& obj, const std::string& key) const {
    const Json& v = obj.at(key);
    if (!v.is_number()) fail(key, "field '" + key + "' must be a number");
    return v.get<double>();
  }

  std::size_t count(const Json& obj, const std::string& key) const {
    const Json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail(key, "field '" + key + "' must be a nonnegative integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
  }

  std::uint64_t seed(const Json& obj, const std::string& key) const {
    const Json& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) {
      return static_cast<std::uint64_t>(v.get<long long>());
    }
    fail(key, "field '" + key + "' must be a nonnegative integer");
  }

  Vector vector(const Json& obj, const std::string& key,
                std::optional<Index> size = std::nullopt) const {
    const Json& v = obj.at(key);
    if (!v.is_array()) fail(key, "field '" + key + "' must be an array");
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, "field '" + key + "' must hold numbers");
      out[static_cast<Index>(i)] = v[i].get<double>();
    }
    if (size && out.size() != *size) {
      fail(key, "field '" + key + "' must have " + std::to_string(*size) +
                    " entries, got " + std::to_string(out.size()));
    }
    return out;
  }

  void required(const Json& obj, const std::string& where,
                const std::string& key) const {
    if (!obj.contains(key)) {
      fail(where, "missing field '" + key + "' in " + where);
    }
  }

 private:
  const std::string& text_;
};

Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Index j = 0; j < v.size(); ++j) arr.push_back(v[j]);
  return arr;
}

}  // namespace

Problem parse_problem(const std::string& text) {
  Reader r(text);
  const Json root = r.parse();
  r.only(root, "problem",
         {"dimension", "components", "nonsmooth", "f_lower_bound_hint"});
  r.required(root, "problem", "dimension");
  r.required(root, "problem", "components");
  r.required(root, "problem", "nonsmooth");
  const std::size_t d_count = r.count(root, "dimension");
  if (d_count == 0) r.fail("dimension", "dimension must be positive");
  const Index d = static_cast<Index>(d_count);

  const Json& comps = root.at("components");
  if (!comps.is_array() || comps.empty()) {
    r.fail("components", "components must be a nonempty array");
  }
  std::vector<SmoothComponent> components;
  for (const Json& c : comps) {
    r.only(c, "component", {"A", "b", "c0_term"});
    r.required(c, "component", "A");
    r.required(c, "component", "b");
    const Vector flat = r.vector(c, "A", d * d);
    Matrix A(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) A(i, j) = flat[i * d + j];
    }
    Vector b = r.vector(c, "b", d);
    const double constant = c.contains("c0_term") ? r.number(c, "c0_term") : 0.0;
    try {
      components.push_back(make_quadratic_component(std::move(A), std::move(b), constant));
    } catch (const InvalidArgument& e) {
      r.fail("A", e.what());
    }
  }

  const Json& ns = root.at("nonsmooth");
  if (!ns.is_object() || !ns.contains("kind") || !ns.at("kind").is_string()) {
    r.fail("nonsmooth", "nonsmooth must be an object with a string 'kind'");
  }
  const std::string kind = ns.at("kind").get<std::string>();
  std::optional<NonsmoothTerm> term;
  try {
    if (kind == "zero") {
      r.only(ns, "nonsmooth", {"kind"});
      term = NonsmoothTerm::zero();
    } else if (kind == "l1") {
      r.only(ns, "nonsmooth", {"kind", "lambda"});
      r.required(ns, "nonsmooth", "lambda");
      term = NonsmoothTerm::l1(r.number(ns, "lambda"));
    } else if (kind == "box") {
      r.only(ns, "nonsmooth", {"kind", "lo", "hi"});
      r.required(ns, "nonsmooth", "lo");
      r.required(ns, "nonsmooth", "hi");
      term = NonsmoothTerm::box(r.vector(ns, "lo", d), r.vector(ns, "hi", d));
    } else if (kind == "box_plus_l1") {
      r.only(ns, "nonsmooth", {"kind", "lo", "hi", "lambda"});
      r.required(ns, "nonsmooth", "lo");
      r.required(ns, "nonsmooth", "hi");
      r.required(ns, "nonsmooth", "lambda");
      term = NonsmoothTerm::box_plus_l1(r.vector(ns, "lo", d), r.vector(ns, "hi", d),
                                        r.number(ns, "lambda"));
    } else {
      r.fail("kind", "unknown nonsmooth kind '" + kind + "'");
    }
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidArgument& e) {
    r.fail("nonsmooth", e.what());
  }

  std::optional<double> hint;
  if (root.contains("f_lower_bound_hint")) {
    hint = r.number(root, "f_lower_bound_hint");
  }
  return Problem(std::move(components), std::move(*term), hint);
}

Problem load_problem(const std::filesystem::path& path) {
  return parse_problem(read_file(path));
}

Json problem_to_json(const Problem& problem) {
  if (!problem.is_quadratic()) {
    throw InvalidArgument("problem_to_json: only quadratic components serialise");
  }
  const Index d = problem.dimension();
  Json root;
  root["dimension"] = d;
  Json comps = Json::array();
  for (const auto& c : problem.components()) {
    const QuadraticForm& q = *c.quadratic();
    Json flat = Json::array();
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) flat.push_back(q.A(i, j));
    }
    Json comp;
    comp["A"] = std::move(flat);
    comp["b"] = vector_json(q.b);
    if (q.constant != 0.0) comp["c0_term"] = q.constant;
    comps.push_back(std::move(comp));
  }
  root["components"] = std::move(comps);
  const NonsmoothTerm& h = problem.nonsmooth();
  Json ns;
  ns["kind"] = to_string(h.kind());
  if (h.has_box()) {
    ns["lo"] = vector_json(h.lower());
    ns["hi"] = vector_json(h.upper());
  }
  if (h.kind() == NonsmoothKind::l1 || h.kind() == NonsmoothKind::box_plus_l1) {
    ns["lambda"] = h.lambda();
  }
  root["nonsmooth"] = std::move(ns);
  if (problem.lower_bound_hint()) {
    root["f_lower_bound_hint"] = *problem.lower_bound_hint();
  }
  return root;
}

RunConfig parse_run_config(const std::string& text) {
  Reader r(text);
  const Json root = r.parse();
  r.only(root, "run config",
         {"alpha", "tau", "schedule", "max_iters", "tol", "x0", "seed", "c0",
          "trace_every", "check_every", "enforce_theory", "full_log"});
  RunConfig cfg;

  if (root.contains("alpha")) {
    const Json& a = root.at("alpha");
    if (a.is_number()) {
      cfg.alpha_rule = AlphaRule::fixed;
      cfg.alpha = a.get<double>();
      if (!(cfg.alpha > 0.0)) r.fail("alpha", "alpha must be positive");
    } else if (a == "auto_lemma2") {
      cfg.alpha_rule = AlphaRule::auto_lemma2;
    } else if (a == "auto_c8") {
      cfg.alpha_rule = AlphaRule::auto_c8;
    } else {
      r.fail("alpha", "alpha must be a number, \"auto_lemma2\" or \"auto_c8\"");
    }
  }

  std::optional<std::size_t> tau;
  if (root.contains("tau")) tau = r.count(root, "tau");
  if (root.contains("seed")) cfg.seed = r.seed(root, "seed");

  if (root.contains("schedule")) {
    const Json& s = root.at("schedule");
    r.only(s, "schedule", {"kind", "block", "tau", "seed"});
    if (!s.contains("kind") || !s.at("kind").is_string()) {
      r.fail("schedule", "schedule needs a string 'kind'");
    }
    cfg.schedule_kind = s.at("kind").get<std::string>();
    if (s.contains("block")) cfg.block = r.count(s, "block");
    if (s.contains("seed")) cfg.seed = r.seed(s, "seed");
    if (s.contains("tau")) {
      const std::size_t inner = r.count(s, "tau");
      if (tau && *tau != inner) {
        r.fail("tau", "schedule.tau and tau disagree");
      }
      tau = inner;
    }
    static const std::set<std::string> kinds = {"none", "cyclic",
                                                "uniform_random",
                                                "adversarial_max"};
    if (!kinds.count(cfg.schedule_kind)) {
      r.fail("kind", "unknown schedule kind '" + cfg.schedule_kind + "'");
    }
    if (cfg.schedule_kind == "uniform_random" && !cfg.seed) {
      r.fail("schedule", "uniform_random schedule requires a seed");
    }
  }
  cfg.tau = tau.value_or(0);

  if (root.contains("max_iters")) {
    cfg.max_iters = r.count(root, "max_iters");
    if (cfg.max_iters == 0) r.fail("max_iters", "max_iters must be positive");
  }
  if (root.contains("tol")) {
    cfg.tol = r.number(root, "tol");
    if (!(cfg.tol > 0.0)) r.fail("tol", "tol must be positive");
  }
  if (root.contains("x0")) {
    const Json& x = root.at("x0");
    if (x == "zeros") {
      cfg.x0.reset();
    } else {
      cfg.x0 = r.vector(root, "x0");
    }
  }
  if (root.contains("c0")) {
    cfg.c0 = r.number(root, "c0");
    if (!(*cfg.c0 > 0.0)) r.fail("c0", "c0 must be positive");
  }
  if (root.contains("trace_every")) {
    cfg.trace_every = r.count(root, "trace_every");
    if (cfg.trace_every == 0) r.fail("trace_every", "trace_every must be positive");
  }
  if (root.contains("check_every")) {
    cfg.check_every = r.count(root, "check_every");
    if (cfg.check_every == 0) r.fail("check_every", "check_every must be positive");
  }
  if (root.contains("enforce_theory")) {
    if (!root.at("enforce_theory").is_boolean()) {
      r.fail("enforce_theory", "enforce_theory must be a boolean");
    }
    cfg.enforce_theory = root.at("enforce_theory").get<bool>();
  }
  if (root.contains("full_log")) {
    if (!root.at("full_log").is_boolean()) {
      r.fail("full_log", "full_log must be a boolean");
    }
    cfg.full_log = root.at("full_log").get<bool>();
  }
  if (cfg.alpha_rule == AlphaRule::auto_c8 && !cfg.c0) {
    r.fail("alpha", "alpha \"auto_c8\" requires c0");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

DelaySchedule make_schedule(const std::string& kind, std::size_t tau,
                            std::optional<std::size_t> block,
                            std::optional<std::uint64_t> seed,
                            std::size_t num_components) {
  const std::string k = kind.empty() ? (tau == 0 ? "none" : "cyclic") : kind;
  if (k == "none") {
    if (tau != 0) {
      throw InvalidConfiguration("schedule 'none' requires tau = 0");
    }
    return DelaySchedule::none();
  }
  if (k == "cyclic") {
    const std::size_t minimal = (num_components + tau) / (tau + 1);
    DelaySchedule s = DelaySchedule::cyclic(block.value_or(minimal), tau);
    s.validate(num_components);
    return s;
  }
  if (k == "uniform_random") {
    if (!seed) throw InvalidConfiguration("uniform_random schedule requires a seed");
    return DelaySchedule::uniform_random(*seed, tau);
  }
  if (k == "adversarial_max") return DelaySchedule::adversarial_max(tau);
  throw InvalidConfiguration("unknown schedule kind '" + k + "'");
}

SolverConfig resolve_config(const RunConfig& run, const Problem& problem) {
  SolverConfig cfg;
  cfg.schedule = make_schedule(run.schedule_kind, run.tau, run.block, run.seed,
                               problem.size());
  const SmoothnessTotals totals = smoothness_totals(problem);
  switch (run.alpha_rule) {
    case AlphaRule::fixed:
      cfg.alpha = run.alpha;
      break;
    case AlphaRule::auto_lemma2:
      cfg.alpha = 0.9 * stepsize_threshold(totals.lipschitz,
                                            totals.concave_modulus, run.tau);
      break;
    case AlphaRule::auto_c8:
      if (!run.c0) throw InvalidConfiguration("auto_c8 requires c0");
      cfg.alpha = theorem1_constants(totals.lipschitz, totals.concave_modulus,
                                     run.tau, *run.c0)
                      .C8;
      break;
  }
  cfg.max_iters = run.max_iters;
  cfg.prox_residual_tol = run.tol;
  if (run.x0) {
    if (run.x0->size() != problem.dimension()) {
      throw InvalidConfiguration("x0 has " + std::to_string(run.x0->size()) +
                                 " entries, problem dimension is " +
                                 std::to_string(problem.dimension()));
    }
    cfg.x0 = *run.x0;
  } else {
    cfg.x0 = Vector::Zero(problem.dimension());
  }
  cfg.trace_every = run.trace_every;
  cfg.check_every = run.check_every;
  cfg.enforce_theory = run.enforce_theory;
  cfg.c0 = run.c0;
  cfg.keep_iterates = run.full_log;
  return cfg;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "k,F,step_norm,prox_residual,max_staleness,delta_k\n";
  for (const auto& r : trace.records) {
    out << r.k << ',' << format_double(r.objective) << ','
        << format_double(r.step_norm) << ',' << format_double(r.prox_residual)
        << ',' << r.max_staleness << ',' << format_double(r.delta) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError(line, "not a number: '" + s + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& s, std::size_t line) {
  const double v = parse_double(s, line);
  if (!(v >= 0.0) || v != std::floor(v)) {
    throw ParseError(line, "not a nonnegative integer: '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "k,F,step_norm,prox_residual,max_staleness,delta_k") {
    throw ParseError(1, "trace CSV header mismatch");
  }
  Trace trace;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) throw ParseError(n, "trace row needs 6 columns");
    trace.records.push_back({parse_count(cells[0], n), parse_double(cells[1], n),
                             parse_double(cells[2], n), parse_double(cells[3], n),
                             parse_count(cells[4], n), parse_double(cells[5], n)});
  }
  if (!trace.records.empty()) {
    trace.iterations = trace.records.back().k;
    trace.final_objective = trace.records.back().objective;
    trace.final_residual = trace.records.back().prox_residual;
  }
  return trace;
}

void write_iterates_csv(std::ostream& out, const std::vector<Vector>& iterates) {
  const Index d = iterates.empty() ? 0 : iterates.front().size();
  out << 'k';
  for (Index j = 0; j < d; ++j) out << ",x_" << j;
  out << '\n';
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    out << k;
    for (Index j = 0; j < d; ++j) out << ',' << format_double(iterates[k][j]);
    out << '\n';
  }
}

std::vector<Vector> read_iterates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("k", 0) != 0) {
    throw ParseError(1, "iterate CSV header mismatch");
  }
  const std::size_t d = split_csv(line).size() - 1;
  std::vector<Vector> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != d + 1) throw ParseError(n, "iterate row has wrong width");
    if (parse_count(cells[0], n) != out.size()) {
      throw ParseError(n, "iterate rows must be consecutive from k=0");
    }
    Vector x(static_cast<Index>(d));
    for (std::size_t j = 0; j < d; ++j) x[static_cast<Index>(j)] = parse_double(cells[j + 1], n);
    out.push_back(std::move(x));
  }
  return out;
}

Json report_to_json(const InequalityReport& report) {
  Json j;
  j["name"] = report.name;
  j["checked"] = report.checked;
  j["violations"] = report.violations;
  j["worst_margin"] = std::isfinite(report.worst_margin) ? Json(report.worst_margin)
                                                         : Json(nullptr);
  j["tolerance"] = report.tolerance;
  j["first_violation"] = report.first_violation ? Json(*report.first_violation)
                                                : Json(nullptr);
  return j;
}

Json constants_to_json(const TheoryConstants& k) {
  Json j;
  j["L"] = k.L;
  j["l"] = k.l;
  j["tau"] = k.tau;
  j["c0"] = k.c0;
  j["L_bar"] = k.L_bar;
  j["l_bar"] = k.l_bar;
  j["alpha_lemma2"] = k.alpha_lemma2;
  j["C1"] = k.C1;
  j["C2"] = k.C2;
  j["C3"] = k.C3;
  j["C4"] = k.C4;
  j["C5"] = k.C5;
  j["C6"] = k.C6;
  j["C7"] = k.C7;
  j["C8"] = k.C8;
  j["contraction_a"] = k.contraction_a;
  return j;
}

Json reference_to_json(const ReferenceSolution& ref) {
  Json j;
  j["method"] = to_string(ref.method);
  Json pts = Json::array();
  for (const auto& p : ref.stationary_points) pts.push_back(vector_json(p));
  j["stationary_points"] = std::move(pts);
  j["F_values"] = ref.objective_values;
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

}  // namespace piag::io
