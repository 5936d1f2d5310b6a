#include "ppscert/certificate.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "ppscert/errors.hpp"

namespace ppscert {

std::string_view to_string(ProvenanceKind kind) {
  switch (kind) {
    case ProvenanceKind::OviScc: return "ovi-scc";
    case ProvenanceKind::Trivial: return "trivial";
    case ProvenanceKind::ZeroCleaned: return "zero-cleaned";
  }
  return "unknown";
}

bool same_serialized_content(const Certificate& a, const Certificate& b) {
  return a.system_fingerprint == b.system_fingerprint && a.names == b.names && a.upper == b.upper &&
         a.epsilon == b.epsilon && a.k_used == b.k_used;
}

std::string system_fingerprint(const PolySystem& sys) {
  const std::string text = to_text(sys);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

RationalVec to_rational(std::span<const double> u, const RoundingGrain& grain) {
  RationalVec out;
  out.reserve(u.size());
  for (double x : u) {
    if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("candidate entries must be finite and >= 0");
    out.push_back(round_up_bounded(exact_from_double(x) + grain.headroom, grain.denominator_bound));
  }
  return out;
}

bool check_inductive(const PolySystem& sys, std::span<const Rational> u) {
  if (u.size() != sys.size()) throw std::invalid_argument("dimension mismatch");
  for (VarId i = 0; i < sys.size(); ++i) {
    if (evaluate_equation(sys, i, u) > u[i]) return false;
  }
  return true;
}

KInduction k_induction_check(const PolySystem& sys, std::span<const Rational> u, int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  if (u.size() != sys.size()) throw std::invalid_argument("dimension mismatch");
  RationalVec w(u.begin(), u.end());
  for (int k = 1; k <= k_max; ++k) {
    RationalVec fw = evaluate(sys, w);
    bool below = true;
    for (std::size_t i = 0; i < fw.size() && below; ++i) below = fw[i] <= u[i];
    if (below) return {true, k};
    for (std::size_t i = 0; i < fw.size(); ++i) w[i] = fw[i] < u[i] ? fw[i] : u[i];
  }
  return {false, 0};
}

std::optional<ValidatedBound> validate_candidate(const PolySystem& sys, std::span<const double> u,
                                                 const RoundingGrain& grain, int k_max) {
  RationalVec q = to_rational(u, grain);
  if (KInduction r = k_induction_check(sys, q, k_max); r.holds) return ValidatedBound{std::move(q), r.k_used};

  RoundingGrain wider = grain;
  wider.headroom += Rational(1, 1 << 20);
  q = to_rational(u, wider);
  if (KInduction r = k_induction_check(sys, q, k_max); r.holds) return ValidatedBound{std::move(q), r.k_used};
  return std::nullopt;
}

Certificate rationalize_and_verify(const PolySystem& sys, std::span<const double> u, const RoundingGrain& grain,
                                   int k_max, const Rational& epsilon) {
  auto validated = validate_candidate(sys, u, grain, k_max);
  if (!validated) {
    throw ExactCheckFailed("candidate is not inductive in exact arithmetic up to depth " + std::to_string(k_max));
  }
  Certificate cert;
  cert.system_fingerprint = system_fingerprint(sys);
  cert.names = sys.names();
  cert.upper = std::move(validated->upper);
  cert.lower_witness.assign(sys.size(), 0.0);
  cert.epsilon = epsilon;
  cert.provenance.assign(sys.size(), Provenance{ProvenanceKind::OviScc, 0});
  cert.k_used = validated->k_used;
  return cert;
}

void write_certificate(std::ostream& out, const Certificate& cert) {
  out << "ppscert v1\n";
  out << "system-sha256 " << cert.system_fingerprint << '\n';
  out << "epsilon " << to_fraction_string(cert.epsilon) << '\n';
  out << "k " << cert.k_used << '\n';
  for (std::size_t i = 0; i < cert.upper.size(); ++i) {
    out << cert.names.at(i) << ' ' << to_fraction_string(cert.upper[i]) << '\n';
  }
}

std::string to_text(const Certificate& cert) {
  std::ostringstream out;
  write_certificate(out, cert);
  return out.str();
}

namespace {

Rational parse_fraction_field(const std::string& text, std::size_t line) {
  const auto slash = text.find('/');
  if (slash == std::string::npos || text.find('/', slash + 1) != std::string::npos) {
    throw ParseError("malformed rational '" + text + "'", line, 1);
  }
  try {
    Rational r = parse_rational(text);
    if (sgn(r) < 0) throw ParseError("negative rational '" + text + "'", line, 1);
    return r;
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed rational '" + text + "'", line, 1);
  }
}

}  // namespace

Certificate parse_certificate(std::string_view text) {
  Certificate cert;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;

  auto next_fields = [&](std::size_t expected, std::string_view what) {
    if (!std::getline(in, line)) throw ParseError("missing " + std::string(what) + " line", line_no + 1, 1);
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> out;
    for (std::string f; fields >> f;) out.push_back(f);
    if (out.size() != expected) throw ParseError("malformed " + std::string(what) + " line", line_no, 1);
    return out;
  };

  if (auto header = next_fields(2, "header"); header[0] != "ppscert" || header[1] != "v1") {
    throw ParseError("unsupported certificate header", line_no, 1);
  }
  auto fp = next_fields(2, "fingerprint");
  if (fp[0] != "system-sha256") throw ParseError("expected system-sha256", line_no, 1);
  cert.system_fingerprint = fp[1];
  auto eps = next_fields(2, "epsilon");
  if (eps[0] != "epsilon") throw ParseError("expected epsilon", line_no, 1);
  cert.epsilon = parse_fraction_field(eps[1], line_no);
  auto k = next_fields(2, "k");
  if (k[0] != "k") throw ParseError("expected k", line_no, 1);
  try {
    std::size_t used = 0;
    cert.k_used = std::stoi(k[1], &used);
    if (used != k[1].size() || cert.k_used < 1) throw std::invalid_argument("k");
  } catch (const std::exception&) {
    throw ParseError("malformed k '" + k[1] + "'", line_no, 1);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name, value, extra;
    if (!(fields >> name >> value) || (fields >> extra)) throw ParseError("malformed variable line", line_no, 1);
    cert.names.push_back(name);
    cert.upper.push_back(parse_fraction_field(value, line_no));
  }
  return cert;
}

}  // namespace ppscert
