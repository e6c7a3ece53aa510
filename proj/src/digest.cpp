#include "driftbench/digest.hpp"

#include <bit>

namespace driftbench {

Fnv64& Fnv64::feed_double(double d) {
    return feed_u64(std::bit_cast<std::uint64_t>(d));
}

Fnv64& Fnv64::feed_bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        feed_byte(p[i]);
    }
    return *this;
}

Fnv64& Fnv64::feed_string(const std::string& s) {
    feed_u64(s.size());
    return feed_bytes(s.data(), s.size());
}

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string Fnv64::hex() const { return to_hex(hash_); }

}  // namespace driftbench
