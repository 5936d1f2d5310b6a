#pragma once

// Float -> rational conversion, exact inductivity and k-induction checks, and
// the certificate object with its line-oriented file format:
//
//   ppscert v1
//   system-sha256 <hex>
//   epsilon <num>/<den>
//   k <k_used>
//   <varname> <num>/<den>        (one line per variable, declaration order)

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppscert/pps.hpp"

namespace ppscert {

enum class ProvenanceKind { OviScc, Trivial, ZeroCleaned };

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::OviScc;
  /// Index of the SCC in solving order; unused for ZeroCleaned.
  std::size_t scc = 0;
};

std::string_view to_string(ProvenanceKind kind);

struct RoundingGrain {
  Integer denominator_bound = Integer(1) << 32;
  Rational headroom = 0;
};

struct Certificate {
  std::string system_fingerprint;
  std::vector<std::string> names;
  RationalVec upper;
  /// Informational; not serialized.
  FloatVec lower_witness;
  Rational epsilon{1, 1000};
  /// Informational; not serialized.
  std::vector<Provenance> provenance;
  int k_used = 1;
};

/// Serialized fields only (fingerprint, epsilon, k, names, upper).
bool same_serialized_content(const Certificate& a, const Certificate& b);

/// SHA-256 (lowercase hex) of the canonical text of the system.
std::string system_fingerprint(const PolySystem& sys);

/// Entrywise smallest rational >= u_i + headroom with bounded denominator.
RationalVec to_rational(std::span<const double> u, const RoundingGrain& grain);

/// f(u) <= u in exact arithmetic.
bool check_inductive(const PolySystem& sys, std::span<const Rational> u);

struct KInduction {
  bool holds = false;
  /// First depth that succeeded (1 = plain inductive); 0 when none did.
  int k_used = 0;
};

/// Tests f(w_k) <= u for w_1 = u, w_{k+1} = u min f(w_k), k = 1..k_max.
KInduction k_induction_check(const PolySystem& sys, std::span<const Rational> u, int k_max);

struct ValidatedBound {
  RationalVec upper;
  int k_used = 1;
};

/// to_rational + k-induction; on failure retries once with 2^-20 extra headroom.
std::optional<ValidatedBound> validate_candidate(const PolySystem& sys, std::span<const double> u,
                                                 const RoundingGrain& grain, int k_max);

/// Throws ExactCheckFailed when validate_candidate fails.
Certificate rationalize_and_verify(const PolySystem& sys, std::span<const double> u, const RoundingGrain& grain,
                                   int k_max, const Rational& epsilon = Rational(1, 1000));

void write_certificate(std::ostream& out, const Certificate& cert);
std::string to_text(const Certificate& cert);
/// Throws ParseError on malformed content.
Certificate parse_certificate(std::string_view text);

struct Verdict {
  bool valid = false;
  std::string reason;
  /// Coordinate that violated the check, when that is the reason.
  std::optional<VarId> failing;
};

/// Trusted checker. Recomputes the fingerprint and re-runs the k-fold inductivity
/// condition at the recorded depth from scratch. Does not clean or decompose sys.
Verdict verify_certificate_file(const PolySystem& sys, const Certificate& cert);

/// As above, but starts from certificate text; malformed text yields an Invalid verdict.
Verdict verify_certificate_text(const PolySystem& sys, std::string_view text);

}  // namespace ppscert
