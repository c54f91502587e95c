#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "clonekit/birkhoff.hpp"
#include "clonekit/fraisse.hpp"
#include "clonekit/operation.hpp"
#include "clonekit/structures.hpp"
#include "clonekit/term.hpp"
#include "clonekit/topology.hpp"

namespace clonekit {

// Rejected input. Lines and columns are 1-based; column 0 means the whole line.
class ParseError : public std::invalid_argument {
 public:
  ParseError(std::string source, int line, int column, std::string message);
  const std::string& source() const { return source_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::string source_;
  int line_, column_;
  std::string message_;
};

// Reads a whole file; a missing or unreadable file is a ParseError at line 0.
std::string read_text_file(const std::string& path);

// Blocks of "op <d> <arity>" followed by one line of d^arity table entries in lexicographic argument order.
std::vector<FiniteOperation> parse_ops(const std::string& text, const std::string& source = "<ops>");
std::string format_ops(const std::vector<FiniteOperation>& ops);

// "structure <d>", then per relation "rel <name> <arity>" and one tuple per line; a blank line ends it.
RelationalStructure parse_structure(const std::string& text, const std::string& source = "<structure>");
std::string format_structure(const RelationalStructure& s);

// "algebra <d> <slot count>" followed by that many op blocks over d.
Algebra parse_algebra(const std::string& text, const std::string& source = "<algebra>");
std::string format_algebra(const Algebra& a);

// "rel <name> <arity> [sym] [irrefl]" lines, then forbidden structures in the structure format.
AgeSpec parse_age(const std::string& text, const std::string& source = "<age>");
std::string format_age(const AgeSpec& spec);
// "preset:<graphs|tournaments|linear-orders|k3-free>" or a file path.
AgeSpec load_age(const std::string& reference);

// One evaluator per op block or per "lazy <backend> <arity> <params...>" line. Backends:
//   projection n k | constant n c | max n | min n | sum n | shift c (unary x+c) | swap a b (unary transposition)
//   rank n i1..ik (canonical rank of the listed coordinates) | affine n a b i1..ik (a*rank+b, a >= 1)
struct ScriptedEvaluator {
  std::string description;  // the declaring line, whitespace-normalized
  Evaluator evaluator;
};
std::vector<ScriptedEvaluator> parse_evaluator_script(const std::string& text, const std::string& source = "<script>");

// Terms over symbols f1..fk (generator order, arities given) and variables x1..xn; "lhs = rhs" for equations.
// The equation arity is the largest variable index, or min_arity if that is larger.
Term parse_term(const std::string& text, const std::vector<int>& symbol_arities, const std::string& source = "<term>");
Equation parse_equation(const std::string& text, const std::vector<int>& symbol_arities, int min_arity = 0,
                        const std::string& source = "<equation>");
std::vector<std::string> generator_names(std::size_t count);

// Whitespace-separated integers, each in [lo, hi].
std::vector<int> parse_int_list(const std::string& text, int lo, int hi, const std::string& source);

// ---------------------------------------------------------------------------------------------------------------
// Reports: a header line, data records, and a closing verdict line, one JSON object per line.

inline constexpr const char* kReportSchema = "clonekit.report/1";

enum class Verdict { True, False, Undetermined, InputError };
int exit_code(Verdict v);
std::string verdict_name(Verdict v);

using Record = nlohmann::ordered_json;

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<Record> records;  // each starts with its "record" kind
  Verdict verdict = Verdict::True;

  Record& add(const std::string& kind);
  std::string to_jsonl() const;
  std::string to_text() const;
  // Strict inverse of to_jsonl.
  static Report from_jsonl(const std::string& text);
  friend bool operator==(const Report& a, const Report& b) { return a.to_jsonl() == b.to_jsonl(); }
};

}  // namespace clonekit
