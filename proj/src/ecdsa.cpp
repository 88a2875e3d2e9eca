#include "campus/ecdsa.hpp"

#include <memory>
#include <stdexcept>

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/obj_mac.h>

namespace campus::ecdsa {

namespace {

struct BnFree {
  void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct CtxFree {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct PointFree {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
using Bn = std::unique_ptr<BIGNUM, BnFree>;
using Ctx = std::unique_ptr<BN_CTX, CtxFree>;
using Point = std::unique_ptr<EC_POINT, PointFree>;

Bn new_bn() {
  Bn b(BN_new());
  if (!b) throw std::bad_alloc();
  return b;
}

Bn bn_from(std::span<const std::uint8_t> bytes) {
  Bn b(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
  if (!b) throw std::bad_alloc();
  return b;
}

template <std::size_t N>
void bn_to(const BIGNUM* b, std::array<std::uint8_t, N>& out, std::size_t offset = 0) {
  BN_bn2binpad(b, out.data() + offset, 32);
}

// Shared, immutable after construction; OpenSSL group operations are
// thread-safe on a const group.
class Curve {
 public:
  static const Curve& get() {
    static const Curve curve;
    return curve;
  }

  const EC_GROUP* group() const { return group_; }
  const BIGNUM* order() const { return order_.get(); }
  const BIGNUM* half_order() const { return half_order_.get(); }

  bool in_scalar_range(const BIGNUM* v) const {
    return !BN_is_zero(v) && !BN_is_negative(v) && BN_cmp(v, order()) < 0;
  }

 private:
  Curve() : group_(EC_GROUP_new_by_curve_name(NID_secp256k1)), order_(new_bn()), half_order_(new_bn()) {
    if (!group_) throw std::runtime_error("secp256k1 unavailable in libcrypto");
    EC_GROUP_get_order(group_, order_.get(), nullptr);
    BN_rshift1(half_order_.get(), order_.get());
  }
  ~Curve() { EC_GROUP_free(group_); }

  EC_GROUP* group_;
  Bn order_;
  Bn half_order_;
};

using Mac = std::array<std::uint8_t, 32>;

Mac hmac(const Mac& key, std::initializer_list<std::span<const std::uint8_t>> parts) {
  Bytes message;
  for (auto p : parts) message.insert(message.end(), p.begin(), p.end());
  Mac out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), message.data(), message.size(), out.data(), &len);
  return out;
}

// bits2octets for qlen = hlen = 256: reduce the digest mod n once.
std::array<std::uint8_t, 32> reduced_digest(const Hash256& digest) {
  const Curve& curve = Curve::get();
  Bn z = bn_from(digest);
  if (BN_cmp(z.get(), curve.order()) >= 0) BN_sub(z.get(), z.get(), curve.order());
  std::array<std::uint8_t, 32> out{};
  bn_to(z.get(), out);
  return out;
}

// RFC 6979 section 3.2 generator; yields successive candidates on retry.
class NonceStream {
 public:
  NonceStream(const PrivateKey& key, const Hash256& digest) {
    const auto h1 = reduced_digest(digest);
    v_.fill(0x01);
    k_.fill(0x00);
    const std::uint8_t zero = 0x00, one = 0x01;
    k_ = hmac(k_, {v_, {&zero, 1}, key, h1});
    v_ = hmac(k_, {v_});
    k_ = hmac(k_, {v_, {&one, 1}, key, h1});
    v_ = hmac(k_, {v_});
  }

  PrivateKey next() {
    const Curve& curve = Curve::get();
    for (;;) {
      if (started_) {
        const std::uint8_t zero = 0x00;
        k_ = hmac(k_, {v_, {&zero, 1}});
        v_ = hmac(k_, {v_});
      }
      started_ = true;
      v_ = hmac(k_, {v_});
      Bn candidate = bn_from(v_);
      if (curve.in_scalar_range(candidate.get())) return v_;
    }
  }

 private:
  Mac v_{};
  Mac k_{};
  bool started_ = false;
};

Point decode_point(std::span<const std::uint8_t> encoded, BN_CTX* ctx) {
  const Curve& curve = Curve::get();
  Point p(EC_POINT_new(curve.group()));
  if (!p) throw std::bad_alloc();
  if (EC_POINT_oct2point(curve.group(), p.get(), encoded.data(), encoded.size(), ctx) != 1) return nullptr;
  return p;
}

}  // namespace

bool is_valid_private_key(const PrivateKey& key) {
  Bn k = bn_from(key);
  return Curve::get().in_scalar_range(k.get());
}

PublicKey public_key_of(const PrivateKey& key) {
  if (!is_valid_private_key(key)) throw std::invalid_argument("private key out of range");
  const Curve& curve = Curve::get();
  Ctx ctx(BN_CTX_new());
  Bn k = bn_from(key);
  Point p(EC_POINT_new(curve.group()));
  EC_POINT_mul(curve.group(), p.get(), k.get(), nullptr, nullptr, ctx.get());
  PublicKey out{};
  EC_POINT_point2oct(curve.group(), p.get(), POINT_CONVERSION_COMPRESSED, out.data(), out.size(), ctx.get());
  return out;
}

bool is_valid_public_key(std::span<const std::uint8_t> encoded) {
  if (encoded.size() != 33 || (encoded[0] != 0x02 && encoded[0] != 0x03)) return false;
  Ctx ctx(BN_CTX_new());
  return decode_point(encoded, ctx.get()) != nullptr;
}

PrivateKey deterministic_nonce(const PrivateKey& key, const Hash256& digest) {
  return NonceStream(key, digest).next();
}

Signature sign(const PrivateKey& key, const Hash256& digest) {
  if (!is_valid_private_key(key)) throw std::invalid_argument("private key out of range");
  const Curve& curve = Curve::get();
  Ctx ctx(BN_CTX_new());
  Bn d = bn_from(key);
  Bn z = bn_from(reduced_digest(digest));
  Point rp(EC_POINT_new(curve.group()));
  Bn x = new_bn(), r = new_bn(), s = new_bn(), kinv = new_bn(), tmp = new_bn();

  NonceStream nonces(key, digest);
  for (;;) {
    Bn k = bn_from(nonces.next());
    EC_POINT_mul(curve.group(), rp.get(), k.get(), nullptr, nullptr, ctx.get());
    EC_POINT_get_affine_coordinates(curve.group(), rp.get(), x.get(), nullptr, ctx.get());
    BN_nnmod(r.get(), x.get(), curve.order(), ctx.get());
    if (BN_is_zero(r.get())) continue;
    // s = k^-1 (z + r d) mod n
    BN_mod_inverse(kinv.get(), k.get(), curve.order(), ctx.get());
    BN_mod_mul(tmp.get(), r.get(), d.get(), curve.order(), ctx.get());
    BN_mod_add(tmp.get(), tmp.get(), z.get(), curve.order(), ctx.get());
    BN_mod_mul(s.get(), kinv.get(), tmp.get(), curve.order(), ctx.get());
    if (BN_is_zero(s.get())) continue;
    if (BN_cmp(s.get(), curve.half_order()) > 0) BN_sub(s.get(), curve.order(), s.get());
    break;
  }
  Signature out{};
  bn_to(r.get(), out, 0);
  bn_to(s.get(), out, 32);
  return out;
}

bool verify(const PublicKey& key, const Hash256& digest, const Signature& signature) {
  const Curve& curve = Curve::get();
  Ctx ctx(BN_CTX_new());
  if (key[0] != 0x02 && key[0] != 0x03) return false;
  Point q = decode_point(key, ctx.get());
  if (!q) return false;

  Bn r = bn_from(std::span(signature).first<32>());
  Bn s = bn_from(std::span(signature).last<32>());
  if (!curve.in_scalar_range(r.get()) || !curve.in_scalar_range(s.get())) return false;
  if (BN_cmp(s.get(), curve.half_order()) > 0) return false;

  Bn z = bn_from(reduced_digest(digest));
  Bn w = new_bn(), u1 = new_bn(), u2 = new_bn(), x = new_bn(), v = new_bn();
  BN_mod_inverse(w.get(), s.get(), curve.order(), ctx.get());
  BN_mod_mul(u1.get(), z.get(), w.get(), curve.order(), ctx.get());
  BN_mod_mul(u2.get(), r.get(), w.get(), curve.order(), ctx.get());

  Point rp(EC_POINT_new(curve.group()));
  EC_POINT_mul(curve.group(), rp.get(), u1.get(), q.get(), u2.get(), ctx.get());
  if (EC_POINT_is_at_infinity(curve.group(), rp.get())) return false;
  EC_POINT_get_affine_coordinates(curve.group(), rp.get(), x.get(), nullptr, ctx.get());
  BN_nnmod(v.get(), x.get(), curve.order(), ctx.get());
  return BN_cmp(v.get(), r.get()) == 0;
}

VerificationCache& VerificationCache::shared() {
  static VerificationCache cache;
  return cache;
}

Hash256 VerificationCache::entry_key(std::span<const std::uint8_t> key, const Hash256& digest,
                                     const Signature& signature) {
  Bytes buf(key.begin(), key.end());
  buf.insert(buf.end(), digest.begin(), digest.end());
  buf.insert(buf.end(), signature.begin(), signature.end());
  return sha256(buf);
}

bool VerificationCache::contains(const Hash256& entry) const {
  std::lock_guard lock(mutex_);
  return entries_.contains(std::string(entry.begin(), entry.end()));
}

void VerificationCache::insert(const Hash256& entry) {
  std::lock_guard lock(mutex_);
  if (entries_.size() >= capacity_) entries_.clear();
  entries_.emplace(entry.begin(), entry.end());
}

void VerificationCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

bool verify_cached(const PublicKey& key, const Hash256& digest, const Signature& signature) {
  auto& cache = VerificationCache::shared();
  const Hash256 entry = VerificationCache::entry_key(key, digest, signature);
  if (cache.contains(entry)) return true;
  if (!verify(key, digest, signature)) return false;
  cache.insert(entry);
  return true;
}

std::optional<PublicKey> recover(const Hash256& digest, const Signature& signature, int recovery_id) {
  if (recovery_id != 0 && recovery_id != 1) return std::nullopt;
  const Curve& curve = Curve::get();
  Ctx ctx(BN_CTX_new());
  Bn r = bn_from(std::span(signature).first<32>());
  Bn s = bn_from(std::span(signature).last<32>());
  if (!curve.in_scalar_range(r.get()) || !curve.in_scalar_range(s.get())) return std::nullopt;

  Point rp(EC_POINT_new(curve.group()));
  if (EC_POINT_set_compressed_coordinates(curve.group(), rp.get(), r.get(), recovery_id, ctx.get()) != 1)
    return std::nullopt;

  // Q = r^-1 (s R - z G) = (-z r^-1) G + (s r^-1) R
  Bn z = bn_from(reduced_digest(digest));
  Bn rinv = new_bn(), u1 = new_bn(), u2 = new_bn();
  BN_mod_inverse(rinv.get(), r.get(), curve.order(), ctx.get());
  BN_mod_mul(u1.get(), z.get(), rinv.get(), curve.order(), ctx.get());
  BN_mod_sub(u1.get(), curve.order(), u1.get(), curve.order(), ctx.get());
  BN_mod_mul(u2.get(), s.get(), rinv.get(), curve.order(), ctx.get());

  Point q(EC_POINT_new(curve.group()));
  EC_POINT_mul(curve.group(), q.get(), u1.get(), rp.get(), u2.get(), ctx.get());
  if (EC_POINT_is_at_infinity(curve.group(), q.get())) return std::nullopt;
  PublicKey out{};
  EC_POINT_point2oct(curve.group(), q.get(), POINT_CONVERSION_COMPRESSED, out.data(), out.size(), ctx.get());
  return out;
}

}  // namespace campus::ecdsa
