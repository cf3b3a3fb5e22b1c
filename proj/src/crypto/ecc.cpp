#include "sermt/crypto/ecc.hpp"

#include <random>

#include "sermt/crypto/rc5.hpp"
#include "sermt/crypto/sha1.hpp"

namespace sermt::crypto {
namespace {

BigInt hex_int(const char* hex) { return BigInt(std::string("0x") + hex); }

std::size_t bit_length(BigInt v) {
  std::size_t n = 0;
  while (v != 0) {
    v >>= 1;
    ++n;
  }
  return n;
}

BigInt read_be(ByteView data) {
  BigInt v = 0;
  for (auto b : data) v = (v << 8) | b;
  return v;
}

}  // namespace

const CurveParams& secp112r1() {
  static const CurveParams params{
      "secp112r1",
      hex_int("DB7C2ABF62E35E668076BEAD208B"),
      hex_int("DB7C2ABF62E35E668076BEAD2088"),
      hex_int("659EF8BA043916EEDE8911702B22"),
      Point{hex_int("09487239995A5EE76B55F9C2F098"), hex_int("A89CE5AF8724C0A23E0E0FF77500"), false},
      hex_int("DB7C2ABF62E35E7628DFAC6561C5"),
  };
  return params;
}

const CurveParams& toy_curve() {
  static const CurveParams params{"toy17", 17, 2, 2, Point{5, 1, false}, 19};
  return params;
}

Curve::Curve(CurveParams params)
    : params_(std::move(params)), field_bytes_((bit_length(params_.p) + 7) / 8) {}

BigInt Curve::mulmod(const BigInt& a, const BigInt& b) const { return (a * b) % params_.p; }
BigInt Curve::addmod(const BigInt& a, const BigInt& b) const { return (a + b) % params_.p; }
BigInt Curve::submod(const BigInt& a, const BigInt& b) const {
  return a >= b ? a - b : params_.p - (b - a);
}

BigInt Curve::inverse(const BigInt& a) const {
  // Fermat: a^(p-2) mod p.
  return boost::multiprecision::powm(a, params_.p - 2, params_.p);
}

bool Curve::on_curve(const Point& pt) const {
  if (pt.infinity) return true;
  if (pt.x >= params_.p || pt.y >= params_.p) return false;
  const BigInt lhs = mulmod(pt.y, pt.y);
  const BigInt rhs = addmod(addmod(mulmod(mulmod(pt.x, pt.x), pt.x), mulmod(params_.a, pt.x)), params_.b);
  return lhs == rhs;
}

Point Curve::negate(const Point& pt) const {
  if (pt.infinity) return pt;
  return Point{pt.x, pt.y == 0 ? BigInt(0) : params_.p - pt.y, false};
}

Curve::Jacobian Curve::jdbl(const Jacobian& p) const {
  if (p.z == 0 || p.y == 0) return Jacobian{1, 1, 0};
  const BigInt yy = mulmod(p.y, p.y);
  const BigInt s = mulmod(4, mulmod(p.x, yy));
  const BigInt zz = mulmod(p.z, p.z);
  const BigInt m = addmod(mulmod(3, mulmod(p.x, p.x)), mulmod(params_.a, mulmod(zz, zz)));
  const BigInt x3 = submod(mulmod(m, m), mulmod(2, s));
  const BigInt y3 = submod(mulmod(m, submod(s, x3)), mulmod(8, mulmod(yy, yy)));
  const BigInt z3 = mulmod(2, mulmod(p.y, p.z));
  return Jacobian{x3, y3, z3};
}

Curve::Jacobian Curve::jadd(const Jacobian& p, const Jacobian& q) const {
  if (p.z == 0) return q;
  if (q.z == 0) return p;
  const BigInt z1z1 = mulmod(p.z, p.z);
  const BigInt z2z2 = mulmod(q.z, q.z);
  const BigInt u1 = mulmod(p.x, z2z2);
  const BigInt u2 = mulmod(q.x, z1z1);
  const BigInt s1 = mulmod(p.y, mulmod(q.z, z2z2));
  const BigInt s2 = mulmod(q.y, mulmod(p.z, z1z1));
  if (u1 == u2) {
    if (s1 != s2) return Jacobian{1, 1, 0};
    return jdbl(p);
  }
  const BigInt h = submod(u2, u1);
  const BigInt r = submod(s2, s1);
  const BigInt hh = mulmod(h, h);
  const BigInt hhh = mulmod(h, hh);
  const BigInt v = mulmod(u1, hh);
  const BigInt x3 = submod(submod(mulmod(r, r), hhh), mulmod(2, v));
  const BigInt y3 = submod(mulmod(r, submod(v, x3)), mulmod(s1, hhh));
  const BigInt z3 = mulmod(h, mulmod(p.z, q.z));
  return Jacobian{x3, y3, z3};
}

Point Curve::to_affine(const Jacobian& p) const {
  if (p.z == 0) return Point::at_infinity();
  const BigInt zi = inverse(p.z);
  const BigInt zi2 = mulmod(zi, zi);
  return Point{mulmod(p.x, zi2), mulmod(p.y, mulmod(zi2, zi)), false};
}

Point Curve::add(const Point& lhs, const Point& rhs) const {
  const Jacobian a = lhs.infinity ? Jacobian{1, 1, 0} : Jacobian{lhs.x, lhs.y, 1};
  const Jacobian b = rhs.infinity ? Jacobian{1, 1, 0} : Jacobian{rhs.x, rhs.y, 1};
  return to_affine(jadd(a, b));
}

Point Curve::dbl(const Point& pt) const {
  if (pt.infinity) return pt;
  return to_affine(jdbl(Jacobian{pt.x, pt.y, 1}));
}

Point Curve::mul(const BigInt& scalar, const Point& pt) const {
  if (pt.infinity || scalar == 0) return Point::at_infinity();
  const Jacobian base{pt.x, pt.y, 1};
  Jacobian acc{1, 1, 0};
  for (std::size_t bit = bit_length(scalar); bit-- > 0;) {
    acc = jdbl(acc);
    if (boost::multiprecision::bit_test(scalar, static_cast<unsigned>(bit))) acc = jadd(acc, base);
  }
  return to_affine(acc);
}

Bytes Curve::encode_scalar(const BigInt& v) const {
  Bytes out(field_bytes_, 0);
  BigInt t = v;
  for (std::size_t i = field_bytes_; i-- > 0;) {
    out[i] = static_cast<std::uint8_t>(t & 0xff);
    t >>= 8;
  }
  return out;
}

Bytes Curve::encode(const Point& pt) const {
  if (pt.infinity) throw CryptoError(CryptoErrorKind::InvalidKey, "cannot encode point at infinity");
  return concat(encode_scalar(pt.x), encode_scalar(pt.y));
}

Point Curve::decode(ByteView data) const {
  if (data.size() != 2 * field_bytes_) {
    throw CryptoError(CryptoErrorKind::Format, "encoded point has wrong length");
  }
  Point pt{read_be(data.first(field_bytes_)), read_be(data.subspan(field_bytes_)), false};
  if (!on_curve(pt)) throw CryptoError(CryptoErrorKind::InvalidKey, "point is not on the curve");
  return pt;
}

KeyPair keypair_from_private(const Curve& curve, const BigInt& private_key) {
  return KeyPair{curve.mul(private_key, curve.params().g), private_key};
}

KeyPair generate_keypair(const Curve& curve, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  BigInt draw = 0;
  for (int i = 0; i < 4; ++i) draw = (draw << 64) | BigInt(rng());
  const BigInt v = draw % (curve.params().order - 1) + 1;
  return keypair_from_private(curve, v);
}

SharedSecret derive_shared_secret(const Curve& curve, const BigInt& own_private,
                                  const Point& peer_public) {
  if (peer_public.infinity || !curve.on_curve(peer_public)) {
    throw CryptoError(CryptoErrorKind::InvalidKey, "peer public key is not a valid curve point");
  }
  const Point shared = curve.mul(own_private, peer_public);
  if (shared.infinity) throw CryptoError(CryptoErrorKind::InvalidKey, "degenerate shared point");
  return SharedSecret{curve.encode_scalar(shared.x)};
}

std::size_t ecc_ciphertext_size(const Curve& curve, std::size_t plain_bytes) {
  return 2 * curve.field_bytes() + rc5_ciphertext_size(plain_bytes) + kDigestSize;
}

Bytes ecc_encrypt(const Curve& curve, const Point& recipient_public, ByteView plaintext,
                  std::uint64_t rng_seed) {
  const KeyPair eph = generate_keypair(curve, rng_seed);
  const SharedSecret secret = derive_shared_secret(curve, eph.private_key, recipient_public);
  Bytes frame = curve.encode(eph.public_key);
  append(frame, rc5_encrypt(rc5_key_from_secret(secret.x_k), plaintext));
  const Digest tag = hmac(secret.x_k, frame);
  append(frame, tag);
  return frame;
}

Bytes ecc_decrypt(const Curve& curve, const BigInt& recipient_private, ByteView ciphertext) {
  const std::size_t point_len = 2 * curve.field_bytes();
  if (ciphertext.size() < point_len + kRc5BlockSize + kDigestSize ||
      (ciphertext.size() - point_len - kDigestSize) % kRc5BlockSize != 0) {
    throw CryptoError(CryptoErrorKind::Format, "malformed ECC ciphertext framing");
  }
  Point eph;
  try {
    eph = curve.decode(ciphertext.first(point_len));
  } catch (const CryptoError&) {
    throw CryptoError(CryptoErrorKind::Format, "ECC ciphertext carries an invalid ephemeral key");
  }
  const SharedSecret secret = derive_shared_secret(curve, recipient_private, eph);
  const ByteView body = ciphertext.first(ciphertext.size() - kDigestSize);
  if (!verify_hmac(secret.x_k, body, ciphertext.last(kDigestSize))) {
    throw CryptoError(CryptoErrorKind::Integrity, "ECC ciphertext tag mismatch");
  }
  return rc5_decrypt(rc5_key_from_secret(secret.x_k), body.subspan(point_len));
}

}  // namespace sermt::crypto
