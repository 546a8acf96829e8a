#include "abstain/hashing.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace abstain::hashing {

Sha256Digest sha256(std::string_view data) {
    Sha256Digest digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len,
                   EVP_sha256(), nullptr) != 1 ||
        len != digest.size()) {
        throw std::runtime_error("sha256: EVP_Digest failed");
    }
    return digest;
}

std::string to_hex(const Sha256Digest& digest) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(digest.size() * 2);
    for (unsigned char byte : digest) {
        out.push_back(kHex[byte >> 4]);
        out.push_back(kHex[byte & 0x0f]);
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    return to_hex(sha256(data));
}

std::string selection_key(std::uint64_t seed, std::string_view record_id) {
    std::string key = std::to_string(seed);
    key.push_back('\x1f');
    key.append(record_id);
    return key;
}

Sha256Digest selection_digest(std::uint64_t seed,
                              std::string_view record_id) {
    return sha256(selection_key(seed, record_id));
}

std::uint64_t digest_mod(const Sha256Digest& digest, std::uint64_t modulus) {
    if (modulus == 0) {
        throw std::invalid_argument("digest_mod: zero modulus");
    }
    // Horner reduction of the big-endian 256-bit value.
    unsigned __int128 rem = 0;
    for (unsigned char byte : digest) {
        rem = ((rem << 8) | byte) % modulus;
    }
    return static_cast<std::uint64_t>(rem);
}

}  // namespace abstain::hashing
