#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

#include "sermt/crypto/bytes.hpp"

namespace sermt::crypto {

using BigInt = boost::multiprecision::uint256_t;

struct Point {
  BigInt x;
  BigInt y;
  bool infinity = false;

  static Point at_infinity() { return Point{0, 0, true}; }
  friend bool operator==(const Point&, const Point&) = default;
};

/// Short Weierstrass curve y^2 = x^3 + a x + b over F_p with a prime-order
/// generator. The modulus must stay below 2^127 so products fit in BigInt.
struct CurveParams {
  std::string name;
  BigInt p;
  BigInt a;
  BigInt b;
  Point g;
  BigInt order;
};

/// SEC 2 secp112r1 (cofactor 1).
const CurveParams& secp112r1();
/// y^2 = x^3 + 2x + 2 over F_17, G = (5, 1), group order 19.
const CurveParams& toy_curve();

class Curve {
 public:
  explicit Curve(CurveParams params);

  const CurveParams& params() const { return params_; }
  std::size_t field_bytes() const { return field_bytes_; }

  bool on_curve(const Point& pt) const;
  Point add(const Point& lhs, const Point& rhs) const;
  Point dbl(const Point& pt) const;
  Point negate(const Point& pt) const;
  Point mul(const BigInt& scalar, const Point& pt) const;

  /// Uncompressed x || y, each field_bytes() long.
  Bytes encode(const Point& pt) const;
  /// Throws CryptoError(InvalidKey) for points off the curve.
  Point decode(ByteView data) const;
  Bytes encode_scalar(const BigInt& v) const;

 private:
  struct Jacobian {
    BigInt x, y, z;
  };
  BigInt mulmod(const BigInt& a, const BigInt& b) const;
  BigInt submod(const BigInt& a, const BigInt& b) const;
  BigInt addmod(const BigInt& a, const BigInt& b) const;
  BigInt inverse(const BigInt& a) const;
  Jacobian jdbl(const Jacobian& p) const;
  Jacobian jadd(const Jacobian& p, const Jacobian& q) const;
  Point to_affine(const Jacobian& p) const;

  CurveParams params_;
  std::size_t field_bytes_;
};

struct KeyPair {
  Point public_key;
  BigInt private_key;
};

struct SharedSecret {
  Bytes x_k;
  friend bool operator==(const SharedSecret&, const SharedSecret&) = default;
};

KeyPair keypair_from_private(const Curve& curve, const BigInt& private_key);
/// Private scalar drawn uniformly from [1, order-1] by a generator seeded with rng_seed.
KeyPair generate_keypair(const Curve& curve, std::uint64_t rng_seed);

/// x-coordinate of own_private * peer_public. Throws CryptoError(InvalidKey)
/// when the peer point is not on the curve or the product is the identity.
SharedSecret derive_shared_secret(const Curve& curve, const BigInt& own_private,
                                  const Point& peer_public);

/// Hybrid public-key encryption: an ephemeral key pair agrees a secret with
/// the recipient; the body is RC5 under that secret and the frame is
/// `ephemeral_point || rc5_ciphertext || HMAC(x_k; ephemeral_point || rc5_ciphertext)`.
Bytes ecc_encrypt(const Curve& curve, const Point& recipient_public, ByteView plaintext,
                  std::uint64_t rng_seed);
/// Throws CryptoError(Format) for bad framing, CryptoError(Integrity) when
/// the tag does not verify (e.g. the wrong private key).
Bytes ecc_decrypt(const Curve& curve, const BigInt& recipient_private, ByteView ciphertext);

std::size_t ecc_ciphertext_size(const Curve& curve, std::size_t plain_bytes);

}  // namespace sermt::crypto
