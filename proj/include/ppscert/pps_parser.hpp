#pragma once

// Explicit polynomial systems, one declaration per variable:
//   x = 0.5 + 1/2 x y^2 + 3//4 z*w
// Terms are separated by `+`; a term is an optional non-negative coefficient
// (decimal, n/d or n//d) followed by factors `name` or `name^k`, optionally
// joined by `*`. Names are [A-Za-z_][A-Za-z0-9_.']* or <...> without spaces
// and without '>' inside. `x =` alone is the zero polynomial. `#` starts a
// comment. Declarations may span lines.

#include <string_view>

#include "ppscert/pps.hpp"

namespace ppscert {

/// Throws ParseError (with line/column) on syntax errors and on duplicate or
/// undefined variables.
PolySystem parse_pps(std::string_view text);

}  // namespace ppscert
