#include "ogb/trust/certificate.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace ogb::trust {

using icn::Name;

Bytes
Certificate::signed_portion() const
{
  BufferWriter w;
  icn::encode_name(w, kl_name);
  w.u8(static_cast<std::uint8_t>(key_type));
  w.blob16(public_key);
  icn::encode_name(w, issuer);
  w.i64(not_before);
  w.i64(not_after);
  w.u8(static_cast<std::uint8_t>(signature_type));
  return std::move(w).take();
}

Bytes
encode(const Certificate& cert)
{
  BufferWriter w;
  w.raw(cert.signed_portion());
  w.blob16(cert.signature);
  return std::move(w).take();
}

Certificate
decode_certificate(ByteSpan wire)
{
  BufferReader r(wire);
  Certificate c;
  c.kl_name = icn::decode_name(r);
  c.key_type = static_cast<icn::SignatureType>(r.u8());
  auto pk = r.blob16();
  c.public_key.assign(pk.begin(), pk.end());
  c.issuer = icn::decode_name(r);
  c.not_before = r.i64();
  c.not_after = r.i64();
  c.signature_type = static_cast<icn::SignatureType>(r.u8());
  auto sig = r.blob16();
  c.signature.assign(sig.begin(), sig.end());
  r.expect_end();
  return c;
}

std::string
identity_to_json(const Identity& id)
{
  nlohmann::json j;
  j["kl_name"] = id.cert.kl_name.to_uri();
  j["certificate"] = to_hex(encode(id.cert));
  j["key_type"] = static_cast<int>(id.key.type);
  j["public_key"] = to_hex(id.key.public_key);
  j["secret_key"] = to_hex(id.key.secret_key);
  return j.dump(2);
}

Identity
identity_from_json(const std::string& text)
{
  try {
    auto j = nlohmann::json::parse(text);
    Identity id;
    id.cert = decode_certificate(from_hex(j.at("certificate").get<std::string>()));
    id.key.type = static_cast<icn::SignatureType>(j.at("key_type").get<int>());
    id.key.public_key = from_hex(j.at("public_key").get<std::string>());
    id.key.secret_key = from_hex(j.at("secret_key").get<std::string>());
    return id;
  }
  catch (const nlohmann::json::exception& e) {
    throw TrustError(std::string("bad identity file: ") + e.what());
  }
}

void
save_identity(const Identity& id, const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw TrustError("cannot write " + path);
  out << identity_to_json(id) << "\n";
}

Identity
load_identity(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw TrustError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return identity_from_json(ss.str());
}

Name
anchor_name()
{
  return Name::parse("/CERT/OGB/ADMIN/rw");
}

Name
tenant_cert_name(const std::string& tid)
{
  return Name{}.appended("CERT").appended(tid).appended("TENANT").appended("rw");
}

Name
engine_cert_name(const std::string& engine_id)
{
  if (engine_id == "ADMIN")
    throw TrustError("reserved engine id");
  return Name{}.appended("CERT").appended("OGB").appended(engine_id).appended("rw");
}

std::string
dataset_id(const std::string& tid, const std::string& cid)
{
  return tid + ":" + cid;
}

Name
user_cert_name(const std::string& tid, const std::string& cid, const std::string& uid, bool write)
{
  return Name{}.appended("CERT").appended(dataset_id(tid, cid)).appended(uid).appended(write ? "rw" : "r");
}

namespace {

Certificate
unsigned_cert(const Name& kl_name, const KeyPair& key, const Name& issuer, const Clock& clock,
              std::int64_t validity, icn::SignatureType sig_type)
{
  Certificate c;
  c.kl_name = kl_name;
  c.key_type = key.type;
  c.public_key = key.public_key;
  c.issuer = issuer;
  c.not_before = clock.unix_seconds() - 60;
  c.not_after = clock.unix_seconds() + validity;
  c.signature_type = sig_type;
  return c;
}

} // namespace

Identity
make_anchor(const Clock& clock, icn::SignatureType type, std::int64_t validity)
{
  Identity id;
  id.key = generate_key(type);
  id.cert = unsigned_cert(anchor_name(), id.key, anchor_name(), clock, validity, type);
  id.cert.signature = sign_bytes(id.key, id.cert.signed_portion());
  return id;
}

Certificate
issue(const Identity& issuer, const Name& kl_name, const KeyPair& subject_key, const Clock& clock,
      std::int64_t validity)
{
  auto c = unsigned_cert(kl_name, subject_key, issuer.cert.kl_name, clock, validity, issuer.key.type);
  c.signature = sign_bytes(issuer.key, c.signed_portion());
  return c;
}

Identity
make_tenant(const Identity& anchor, const std::string& tid, const Clock& clock, icn::SignatureType type)
{
  Identity id;
  id.key = generate_key(type);
  id.cert = issue(anchor, tenant_cert_name(tid), id.key, clock);
  return id;
}

Identity
make_engine(const Identity& anchor, const std::string& engine_id, const Clock& clock, icn::SignatureType type)
{
  Identity id;
  id.key = generate_key(type);
  id.cert = issue(anchor, engine_cert_name(engine_id), id.key, clock);
  return id;
}

Identity
make_user(const Identity& tenant, const std::string& tid, const std::string& cid, const std::string& uid, bool write,
          const Clock& clock, icn::SignatureType type)
{
  Identity id;
  id.key = generate_key(type);
  id.cert = issue(tenant, user_cert_name(tid, cid, uid, write), id.key, clock);
  return id;
}

void
CertStore::add(const Certificate& cert)
{
  std::unique_lock lock(m_mutex);
  m_certs.insert_or_assign(cert.kl_name, cert);
}

std::optional<Certificate>
CertStore::find(const Name& kl_name) const
{
  std::shared_lock lock(m_mutex);
  auto it = m_certs.find(kl_name);
  if (it == m_certs.end())
    return std::nullopt;
  return it->second;
}

std::size_t
CertStore::size() const
{
  std::shared_lock lock(m_mutex);
  return m_certs.size();
}

std::vector<Certificate>
CertStore::all() const
{
  std::shared_lock lock(m_mutex);
  std::vector<Certificate> out;
  for (const auto& [n, c] : m_certs)
    out.push_back(c);
  return out;
}

std::optional<Name>
required_issuer(const Name& kl)
{
  if (kl.size() != 4 || kl[0] != "CERT" || (kl[3] != "r" && kl[3] != "rw"))
    throw TrustError("malformed key-locator " + kl.to_uri());
  if (kl == anchor_name())
    return std::nullopt;
  if (kl[1] == "OGB")
    return anchor_name();
  if (kl[2] == "TENANT") {
    if (kl[3] != "rw" || kl[1].find(':') != std::string::npos)
      throw TrustError("malformed tenant key-locator " + kl.to_uri());
    return anchor_name();
  }
  auto colon = kl[1].find(':');
  if (colon == std::string::npos || colon == 0)
    throw TrustError("user key-locator without tenant: " + kl.to_uri());
  return tenant_cert_name(kl[1].substr(0, colon));
}

namespace {

bool
link_ok(const Certificate& cert, const Certificate& issuer, const Clock& clock)
{
  auto now = clock.unix_seconds();
  if (now < cert.not_before || now > cert.not_after)
    return false;
  if (cert.issuer != issuer.kl_name || cert.signature_type != issuer.key_type)
    return false;
  return verify_bytes(issuer.key_type, issuer.public_key, cert.signed_portion(), cert.signature);
}

} // namespace

bool
validate_chain(const Certificate& cert, const Certificate& anchor, const CertStore& store, const Clock& clock)
{
  if (!link_ok(anchor, anchor, clock))
    return false;
  const Certificate* current = &cert;
  std::optional<Certificate> holder;
  for (int depth = 0; depth < 8; ++depth) {
    std::optional<Name> issuer_name;
    try {
      issuer_name = required_issuer(current->kl_name);
    }
    catch (const TrustError&) {
      return false;
    }
    if (!issuer_name)
      return *current == anchor;
    if (current->issuer != *issuer_name)
      return false;
    Certificate issuer;
    if (*issuer_name == anchor.kl_name) {
      issuer = anchor;
    }
    else {
      auto found = store.find(*issuer_name);
      if (!found)
        throw MissingCertificate("missing certificate " + issuer_name->to_uri());
      issuer = *found;
    }
    if (!link_ok(*current, issuer, clock))
      return false;
    if (issuer.kl_name == anchor.kl_name)
      return true;
    holder = issuer;
    current = &*holder;
  }
  return false;
}

Validator::Validator(Certificate anchor, std::shared_ptr<Clock> clock, Fetcher fetcher)
  : m_anchor(std::move(anchor))
  , m_clock(std::move(clock))
  , m_fetcher(std::move(fetcher))
{
  m_store.add(m_anchor);
}

void
Validator::add(const Certificate& cert)
{
  m_store.add(cert);
}

bool
Validator::resolve(const Name& kl_name, int depth)
{
  if (depth > 8)
    return false;
  {
    std::shared_lock lock(m_mutex);
    if (m_valid.contains(kl_name))
      return true;
  }
  auto cert = m_store.find(kl_name);
  if (!cert && m_fetcher) {
    ++m_fetches;
    cert = m_fetcher(kl_name);
    if (cert && cert->kl_name == kl_name)
      m_store.add(*cert);
    else
      cert.reset();
  }
  if (!cert)
    return false;
  std::optional<Name> issuer;
  try {
    issuer = required_issuer(kl_name);
  }
  catch (const TrustError&) {
    return false;
  }
  if (issuer && *issuer != m_anchor.kl_name && !resolve(*issuer, depth + 1))
    return false;
  bool ok = false;
  try {
    ok = validate_chain(*cert, m_anchor, m_store, *m_clock);
  }
  catch (const MissingCertificate&) {
    ok = false;
  }
  if (ok) {
    std::unique_lock lock(m_mutex);
    m_valid.insert(kl_name);
  }
  return ok;
}

std::optional<Certificate>
Validator::certificate(const Name& kl_name)
{
  if (!resolve(kl_name, 0))
    return std::nullopt;
  return m_store.find(kl_name);
}

std::optional<Certificate>
Validator::validate(const icn::Data& data)
{
  if (data.signature.type == icn::SignatureType::None)
    return std::nullopt;
  auto cert = certificate(data.signature.key_locator);
  if (!cert || !verify(data, cert->key_type, cert->public_key))
    return std::nullopt;
  return cert;
}

std::optional<Certificate>
Validator::validate(const icn::Interest& interest)
{
  if (!interest.signature)
    return std::nullopt;
  auto cert = certificate(interest.signature->key_locator);
  if (!cert || !verify(interest, cert->key_type, cert->public_key))
    return std::nullopt;
  return cert;
}

CertRepo::CertRepo(std::shared_ptr<icn::AppFace> face)
  : m_face(std::move(face))
{
  std::weak_ptr<icn::AppFace> weak = m_face;
  m_face->set_interest_filter(Name::parse("/CERT"), [this, weak](const icn::Interest& i) {
    auto cert = m_store.find(i.name);
    auto f = weak.lock();
    if (!cert || !f)
      return;
    icn::Data d;
    d.name = i.name;
    d.payload = encode(*cert);
    d.freshness = Millis{3600'000};
    f->put(d);
  });
}

void
CertRepo::publish(const Certificate& cert)
{
  m_store.add(cert);
}

Validator::Fetcher
make_fetcher(std::weak_ptr<icn::AppFace> face, Millis lifetime, int retries)
{
  return [face, lifetime, retries](const Name& kl_name) -> std::optional<Certificate> {
    auto f = face.lock();
    if (!f)
      return std::nullopt;
    icn::Interest i;
    i.name = kl_name;
    i.lifetime = lifetime;
    try {
      auto d = f->express(i, retries);
      return decode_certificate(d.payload);
    }
    catch (const std::exception&) {
      return std::nullopt;
    }
  };
}

} // namespace ogb::trust
