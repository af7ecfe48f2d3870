#ifndef PIAG_IO_HPP
#define PIAG_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"
#include "piag/diagnostics.hpp"
#include "piag/problems.hpp"
#include "piag/solver.hpp"

namespace piag::io {

using Json = nlohmann::ordered_json;

/// Malformed input. `line` is 1-based, 0 when unknown.
class ParseError : public InvalidArgument {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/**
 * Problem file schema (JSON; unknown fields are rejected):
 *
 *   {
 *     "dimension": d,
 *     "components": [ {"A": [d*d numbers, row-major], "b": [d numbers],
 *                      "c0_term": number (optional)} , ... ],
 *     "nonsmooth": {"kind": "zero"}
 *                | {"kind": "l1", "lambda": number}
 *                | {"kind": "box", "lo": [d], "hi": [d]}
 *                | {"kind": "box_plus_l1", "lo": [d], "hi": [d], "lambda": number},
 *     "f_lower_bound_hint": number (optional)
 *   }
 */
Problem parse_problem(const std::string& text);
Problem load_problem(const std::filesystem::path& path);
Json problem_to_json(const Problem& problem);

enum class AlphaRule { fixed, auto_lemma2, auto_c8 };

/**
 * Run-config file schema (JSON; unknown fields are rejected):
 *
 *   alpha          number | "auto_lemma2" (0.9 x descent threshold) | "auto_c8"
 *   tau            delay bound (may also be given inside "schedule")
 *   schedule       {"kind": "none"|"cyclic"|"uniform_random"|"adversarial_max",
 *                   "block": n, "tau": n, "seed": n}
 *   max_iters, tol, x0 (vector | "zeros"), seed, c0,
 *   trace_every, check_every, enforce_theory, full_log
 */
struct RunConfig {
  AlphaRule alpha_rule = AlphaRule::auto_lemma2;
  double alpha = 0.0;
  std::size_t tau = 0;
  std::string schedule_kind;  // empty: none when tau == 0, cyclic otherwise
  std::optional<std::size_t> block;
  std::optional<std::uint64_t> seed;
  std::size_t max_iters = 100000;
  double tol = 1e-8;
  std::optional<Vector> x0;  // empty: zeros
  std::optional<double> c0;
  std::size_t trace_every = 1;
  std::size_t check_every = 10;
  bool enforce_theory = false;
  bool full_log = false;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

DelaySchedule make_schedule(const std::string& kind, std::size_t tau,
                            std::optional<std::size_t> block,
                            std::optional<std::uint64_t> seed,
                            std::size_t num_components);

/// Resolves automatic stepsizes and defaults against a concrete problem.
SolverConfig resolve_config(const RunConfig& run, const Problem& problem);

/// Header `k,F,step_norm,prox_residual,max_staleness,delta_k`, 17 significant
/// digits.
void write_trace_csv(std::ostream& out, const Trace& trace);
Trace read_trace_csv(std::istream& in);

/// Header `k,x_0,...,x_{d-1}`.
void write_iterates_csv(std::ostream& out, const std::vector<Vector>& iterates);
std::vector<Vector> read_iterates_csv(std::istream& in);

Json report_to_json(const InequalityReport& report);
Json constants_to_json(const TheoryConstants& constants);
Json reference_to_json(const ReferenceSolution& ref);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

/// %.17g formatting; "inf" / "-inf" / "nan" for non-finite values.
std::string format_double(double v);

}  // namespace piag::io

#endif  // PIAG_IO_HPP
