#pragma once

#include <map>
#include <string>
#include <vector>

#include "clonekit/formats.hpp"

namespace clonekit {

// Default numeric parameters, read from "key=value,key=value" (the CLONEKIT_CAPS variable). Flags override them.
class Caps {
 public:
  static Caps parse(const std::string& text);
  long long get(const std::string& key, long long fallback) const;
  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, long long> values_;
};

struct CliResult {
  int exit_code = 0;
  Report report;
  std::string out;  // text or JSONL report, or help text
  std::string err;  // diagnostics
};

// One invocation without the program name, e.g. {"clone", "gen", "--in", "nots.ops", "--cap", "2"}.
CliResult run_cli(const std::vector<std::string>& args, const std::string& caps_text = "");

}  // namespace clonekit
