#pragma once

#include <string>
#include <vector>

// Built-in reproduction checks: each row compares a computed quantity
// against its published reference (or a bound) with a pinned tolerance.
// The same rows back the `repro` CLI verb and the acceptance test suite.

namespace microtrap::repro {

enum class CheckKind {
  relative,     // |computed - reference| <= tolerance * |reference|
  absolute,     // |computed - reference| <= tolerance
  upper_bound,  // computed <= reference
  lower_bound,  // computed >= reference
};

struct ReproCheck {
  std::string name;
  double reference = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;  // unused for bound kinds
  CheckKind kind = CheckKind::relative;

  bool passed() const;
  double relative_error() const;  // |computed - reference| / |reference|
};

// All rows, computed fresh; deterministic and fast (< 1 s).
std::vector<ReproCheck> builtin_checks();

bool all_passed(const std::vector<ReproCheck>& checks);

// Plain-text table with a constants header and a summary line.
std::string format_report(const std::vector<ReproCheck>& checks);

}  // namespace microtrap::repro
