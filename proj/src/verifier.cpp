// The trusted certificate checker. Deliberately independent of the solver: it
// uses only polynomial evaluation from the core and its own k-fold loop.

#include <string>

#include "ppscert/certificate.hpp"
#include "ppscert/errors.hpp"

namespace ppscert {

namespace {

Verdict invalid(std::string reason, std::optional<VarId> failing = std::nullopt) {
  return Verdict{false, std::move(reason), failing};
}

}  // namespace

Verdict verify_certificate_file(const PolySystem& sys, const Certificate& cert) {
  if (cert.system_fingerprint != system_fingerprint(sys)) {
    return invalid("fingerprint mismatch: certificate is for a different system");
  }
  if (cert.upper.size() != sys.size() || cert.names.size() != sys.size()) {
    return invalid("malformed: certificate lists " + std::to_string(cert.upper.size()) + " variables, system has " +
                   std::to_string(sys.size()));
  }
  for (VarId i = 0; i < sys.size(); ++i) {
    if (cert.names[i] != sys.name(i)) {
      return invalid("malformed: expected variable '" + sys.name(i) + "' at position " + std::to_string(i + 1), i);
    }
    if (sgn(cert.upper[i]) < 0 || cert.upper[i].get_den() <= 0) {
      return invalid("malformed rational for '" + sys.name(i) + "'", i);
    }
  }
  if (cert.k_used < 1) return invalid("malformed: k must be at least 1");

  // w_1 = u, w_{j+1} = u min f(w_j); the condition is f(w_k) <= u.
  const RationalVec& u = cert.upper;
  RationalVec w = u;
  for (int depth = 1;; ++depth) {
    RationalVec fw(sys.size());
    for (VarId i = 0; i < sys.size(); ++i) fw[i] = evaluate_equation(sys, i, std::span<const Rational>(w));
    if (depth == cert.k_used) {
      for (VarId i = 0; i < sys.size(); ++i) {
        if (fw[i] > u[i]) {
          return invalid("inductivity fails at '" + sys.name(i) + "'", i);
        }
      }
      return Verdict{true, "valid", std::nullopt};
    }
    for (VarId i = 0; i < sys.size(); ++i) {
      if (fw[i] < u[i]) w[i] = fw[i];
      else w[i] = u[i];
    }
  }
}

Verdict verify_certificate_text(const PolySystem& sys, std::string_view text) {
  Certificate cert;
  try {
    cert = parse_certificate(text);
  } catch (const ParseError& e) {
    return invalid(std::string("malformed certificate: ") + e.what());
  }
  return verify_certificate_file(sys, cert);
}

}  // namespace ppscert
