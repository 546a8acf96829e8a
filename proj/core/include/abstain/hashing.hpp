#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace abstain::hashing {

using Sha256Digest = std::array<unsigned char, 32>;

Sha256Digest sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string to_hex(const Sha256Digest& digest);

// Canonical byte string for per-record selection:
//   utf8(decimal seed) 0x1F utf8(record_id)
std::string selection_key(std::uint64_t seed, std::string_view record_id);

// Digest of selection_key. Per-record and independent of iteration order,
// so anything derived from it is stable under input permutation.
Sha256Digest selection_digest(std::uint64_t seed, std::string_view record_id);

// Big-endian integer value of the digest, reduced mod `modulus`.
std::uint64_t digest_mod(const Sha256Digest& digest, std::uint64_t modulus);

}  // namespace abstain::hashing
