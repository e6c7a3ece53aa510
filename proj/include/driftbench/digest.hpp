#pragma once

#include <cstdint>
#include <string>

namespace driftbench {

// FNV-1a 64-bit. Not cryptographic; used for provenance fingerprints and
// bit-exactness checks in traces and tests.
class Fnv64 {
  public:
    Fnv64& feed_byte(unsigned char b) {
        hash_ ^= b;
        hash_ *= 0x100000001b3ULL;
        return *this;
    }

    Fnv64& feed_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            feed_byte(static_cast<unsigned char>(v >> (8 * i)));
        }
        return *this;
    }

    Fnv64& feed_double(double d);
    Fnv64& feed_bytes(const void* data, std::size_t len);
    Fnv64& feed_string(const std::string& s);

    std::uint64_t value() const { return hash_; }
    std::string hex() const;

  private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);

}  // namespace driftbench
