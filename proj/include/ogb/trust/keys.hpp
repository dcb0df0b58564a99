#pragma once

#include "ogb/icn/packet.hpp"

#include <stdexcept>

namespace ogb::trust {

class TrustError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Ed25519 key pair, or an HMAC-SHA256 key standing in for one (public and
/// secret halves are then the same 32-byte key; only for benchmarks/tests).
struct KeyPair
{
  icn::SignatureType type = icn::SignatureType::Ed25519;
  Bytes public_key;
  Bytes secret_key;
};

KeyPair
generate_key(icn::SignatureType type = icn::SignatureType::Ed25519);

/// Deterministic key from a 32-byte seed.
KeyPair
key_from_seed(icn::SignatureType type, ByteSpan seed);

Bytes
sign_bytes(const KeyPair& key, ByteSpan message);

bool
verify_bytes(icn::SignatureType type, ByteSpan public_key, ByteSpan message, ByteSpan signature);

/// Signs packets with a key under the given key-locator name.
class Signer
{
public:
  Signer() = default;
  Signer(KeyPair key, icn::Name key_locator);

  void
  sign(icn::Data& data) const;

  void
  sign(icn::Interest& interest) const;

  const icn::Name& key_locator() const { return m_key_locator; }
  const KeyPair& key() const { return m_key; }

private:
  KeyPair m_key;
  icn::Name m_key_locator;
};

bool
verify(const icn::Data& data, icn::SignatureType type, ByteSpan public_key);

bool
verify(const icn::Interest& interest, icn::SignatureType type, ByteSpan public_key);

} // namespace ogb::trust
