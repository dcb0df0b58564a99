#pragma once

#include "ogb/common/clock.hpp"
#include "ogb/icn/app_face.hpp"
#include "ogb/trust/keys.hpp"

#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>

namespace ogb::trust {

class MissingCertificate : public TrustError
{
public:
  using TrustError::TrustError;
};

struct Certificate
{
  /// CERT/{did}/{uid}/{r|rw}
  icn::Name kl_name;
  icn::SignatureType key_type = icn::SignatureType::Ed25519;
  Bytes public_key;
  icn::Name issuer;
  std::int64_t not_before = 0;
  std::int64_t not_after = 0;
  icn::SignatureType signature_type = icn::SignatureType::Ed25519;
  Bytes signature;

  /// Bytes covered by the issuer signature.
  Bytes
  signed_portion() const;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

Bytes
encode(const Certificate& cert);

Certificate
decode_certificate(ByteSpan wire);

/// A key pair together with its certificate.
struct Identity
{
  KeyPair key;
  Certificate cert;

  Signer signer() const { return Signer(key, cert.kl_name); }
};

/// JSON form used by the CLI: {"certificate": hex, "key_type": n, "public_key": hex, "secret_key": hex}.
std::string
identity_to_json(const Identity& id);

Identity
identity_from_json(const std::string& text);

void
save_identity(const Identity& id, const std::string& path);

Identity
load_identity(const std::string& path);

inline constexpr std::int64_t kDefaultValiditySeconds = 10LL * 365 * 24 * 3600;

icn::Name
anchor_name();

icn::Name
tenant_cert_name(const std::string& tid);

icn::Name
engine_cert_name(const std::string& engine_id);

/// did = "tid:cid"
std::string
dataset_id(const std::string& tid, const std::string& cid);

icn::Name
user_cert_name(const std::string& tid, const std::string& cid, const std::string& uid, bool write);

/// Self-signed trust anchor of the system administrator.
Identity
make_anchor(const Clock& clock, icn::SignatureType type = icn::SignatureType::Ed25519,
            std::int64_t validity = kDefaultValiditySeconds);

/// Signs a certificate for subject_key under kl_name.
Certificate
issue(const Identity& issuer, const icn::Name& kl_name, const KeyPair& subject_key, const Clock& clock,
      std::int64_t validity = kDefaultValiditySeconds);

Identity
make_tenant(const Identity& anchor, const std::string& tid, const Clock& clock,
            icn::SignatureType type = icn::SignatureType::Ed25519);

Identity
make_engine(const Identity& anchor, const std::string& engine_id, const Clock& clock,
            icn::SignatureType type = icn::SignatureType::Ed25519);

Identity
make_user(const Identity& tenant, const std::string& tid, const std::string& cid, const std::string& uid, bool write,
          const Clock& clock, icn::SignatureType type = icn::SignatureType::Ed25519);

/// Thread-safe certificate map keyed by kl_name.
class CertStore
{
public:
  void
  add(const Certificate& cert);

  std::optional<Certificate>
  find(const icn::Name& kl_name) const;

  std::size_t
  size() const;

  std::vector<Certificate>
  all() const;

private:
  mutable std::shared_mutex m_mutex;
  std::unordered_map<icn::Name, Certificate> m_certs;
};

/// Naming policy of the chain: which issuer may sign a given kl_name.
/// Returns the required issuer name, or nullopt for the anchor itself.
std::optional<icn::Name>
required_issuer(const icn::Name& kl_name);

/// True iff every link verifies, follows the naming policy, is within its
/// validity window and the chain ends at the anchor. Throws
/// MissingCertificate when an intermediate cannot be found.
bool
validate_chain(const Certificate& cert, const Certificate& anchor, const CertStore& store, const Clock& clock);

/// Packet validator with a local store, an optional network fetcher for
/// unknown key-locators and a cache of already validated certificates.
class Validator
{
public:
  using Fetcher = std::function<std::optional<Certificate>(const icn::Name&)>;

  Validator(Certificate anchor, std::shared_ptr<Clock> clock, Fetcher fetcher = {});

  void
  add(const Certificate& cert);

  /// Validated certificate for a key-locator, fetching it and its issuers
  /// when needed; nullopt when the chain is invalid or incomplete.
  std::optional<Certificate>
  certificate(const icn::Name& kl_name);

  /// Certificate of a Data's signer if the signature and chain are valid.
  std::optional<Certificate>
  validate(const icn::Data& data);

  std::optional<Certificate>
  validate(const icn::Interest& interest);

  const Certificate& anchor() const { return m_anchor; }

  std::uint64_t fetches() const { return m_fetches.load(); }

private:
  bool
  resolve(const icn::Name& kl_name, int depth);

  Certificate m_anchor;
  std::shared_ptr<Clock> m_clock;
  Fetcher m_fetcher;
  CertStore m_store;

  std::shared_mutex m_mutex;
  std::unordered_set<icn::Name> m_valid;
  std::atomic<std::uint64_t> m_fetches{0};
};

/// Serves certificates as Data named by their kl_name under /CERT.
class CertRepo
{
public:
  explicit CertRepo(std::shared_ptr<icn::AppFace> face);

  void
  publish(const Certificate& cert);

  std::size_t size() const { return m_store.size(); }

private:
  std::shared_ptr<icn::AppFace> m_face;
  CertStore m_store;
};

/// Fetcher that retrieves certificates from the repo over the fabric.
Validator::Fetcher
make_fetcher(std::weak_ptr<icn::AppFace> face, Millis lifetime = Millis{1000}, int retries = 2);

} // namespace ogb::trust
