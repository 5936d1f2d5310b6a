#pragma once

// pPL -> pPDA. Stack symbols are (procedure, program point, local store);
// states are `run` plus one `ret(v)` per return value that occurs. A call
// pushes the callee's entry symbol above a continuation symbol of the caller;
// the continuation reads ret(v) and resumes. Deterministic steps are collapsed
// and only reachable configurations are emitted.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>

#include "ppscert/ppda.hpp"
#include "ppscert/program.hpp"

namespace ppscert {

class TranslateError : public std::runtime_error {
public:
  TranslateError(const std::string& message, Loc loc)
      : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message), loc_(loc) {}
  explicit TranslateError(const std::string& message) : std::runtime_error(message) {}
  Loc loc() const { return loc_; }

private:
  Loc loc_;
};

struct TranslateOptions {
  std::size_t max_symbols = 1'000'000;
};

struct Translation {
  Ppda ppda;  // initial configuration set
  Config init;
  /// ret states reachable as results of main -> printed value (`true`, `3`, `void`).
  std::map<StateId, std::string> main_values;
};

/// Throws TranslateError on runtime faults found during exploration (division
/// by zero, dynamic prob-blocks not summing to 1, uniform out of range) or when
/// the symbol cap is exceeded.
Translation translate(const Program& prog, const TranslateOptions& options = {});

}  // namespace ppscert
