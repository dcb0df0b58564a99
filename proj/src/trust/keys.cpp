#include "ogb/trust/keys.hpp"

#include <sodium.h>

namespace ogb::trust {

namespace {

void
ensure_sodium()
{
  static const bool ok = sodium_init() >= 0;
  if (!ok)
    throw TrustError("libsodium initialisation failed");
}

} // namespace

KeyPair
generate_key(icn::SignatureType type)
{
  ensure_sodium();
  Bytes seed(32);
  randombytes_buf(seed.data(), seed.size());
  return key_from_seed(type, seed);
}

KeyPair
key_from_seed(icn::SignatureType type, ByteSpan seed)
{
  ensure_sodium();
  if (seed.size() != 32)
    throw TrustError("seed must be 32 bytes");
  KeyPair k;
  k.type = type;
  switch (type) {
  case icn::SignatureType::Ed25519:
    k.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    k.secret_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(k.public_key.data(), k.secret_key.data(), seed.data());
    break;
  case icn::SignatureType::HmacSha256:
    k.secret_key.assign(seed.begin(), seed.end());
    k.public_key = k.secret_key;
    break;
  default:
    throw TrustError("unsupported key type");
  }
  return k;
}

Bytes
sign_bytes(const KeyPair& key, ByteSpan message)
{
  ensure_sodium();
  switch (key.type) {
  case icn::SignatureType::Ed25519: {
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), key.secret_key.data());
    return sig;
  }
  case icn::SignatureType::HmacSha256: {
    Bytes mac(crypto_auth_hmacsha256_BYTES);
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, key.secret_key.data(), key.secret_key.size());
    crypto_auth_hmacsha256_update(&st, message.data(), message.size());
    crypto_auth_hmacsha256_final(&st, mac.data());
    return mac;
  }
  default:
    throw TrustError("unsupported key type");
  }
}

bool
verify_bytes(icn::SignatureType type, ByteSpan public_key, ByteSpan message, ByteSpan signature)
{
  ensure_sodium();
  switch (type) {
  case icn::SignatureType::Ed25519:
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES)
      return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), public_key.data()) == 0;
  case icn::SignatureType::HmacSha256: {
    if (signature.size() != crypto_auth_hmacsha256_BYTES)
      return false;
    KeyPair k{type, {}, Bytes(public_key.begin(), public_key.end())};
    auto expected = sign_bytes(k, message);
    return sodium_memcmp(expected.data(), signature.data(), expected.size()) == 0;
  }
  default:
    return false;
  }
}

Signer::Signer(KeyPair key, icn::Name key_locator)
  : m_key(std::move(key))
  , m_key_locator(std::move(key_locator))
{
}

void
Signer::sign(icn::Data& data) const
{
  data.signature.type = m_key.type;
  data.signature.key_locator = m_key_locator;
  data.signature.value = sign_bytes(m_key, data.signed_portion(m_key_locator));
}

void
Signer::sign(icn::Interest& interest) const
{
  icn::SignatureInfo info;
  info.type = m_key.type;
  info.key_locator = m_key_locator;
  info.value = sign_bytes(m_key, interest.signed_portion(m_key_locator));
  interest.signature = std::move(info);
}

bool
verify(const icn::Data& data, icn::SignatureType type, ByteSpan public_key)
{
  if (data.signature.type != type)
    return false;
  return verify_bytes(type, public_key, data.signed_portion(data.signature.key_locator), data.signature.value);
}

bool
verify(const icn::Interest& interest, icn::SignatureType type, ByteSpan public_key)
{
  if (!interest.signature || interest.signature->type != type)
    return false;
  return verify_bytes(type, public_key, interest.signed_portion(interest.signature->key_locator),
                      interest.signature->value);
}

} // namespace ogb::trust
