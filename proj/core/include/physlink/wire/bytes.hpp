#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "physlink/math.hpp"
#include "physlink/transform.hpp"

namespace physlink::wire {

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Little-endian byte writer. All multi-byte fields on the wire are
// little-endian regardless of host order.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { append(&v, 2); }
    void u32(std::uint32_t v) { append(&v, 4); }
    void f32(float v) { append(&v, 4); }
    void vec3(const Vec3& v) { f32(v.x); f32(v.y); f32(v.z); }
    void quat(const Quat& q) { f32(q.x); f32(q.y); f32(q.z); f32(q.w); }
    void raw(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

    // Back-fills a u16 written earlier (e.g. a count known only after the fact).
    void patch_u16(std::size_t at, std::uint16_t v) { std::memcpy(buf_.data() + at, &v, 2); }

    std::size_t size() const { return buf_.size(); }
    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    void append(const void* p, std::size_t n) {
        static_assert(std::endian::native == std::endian::little, "wire codec assumes little-endian host");
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }

    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return take<std::uint8_t>(); }
    std::uint16_t u16() { return take<std::uint16_t>(); }
    std::uint32_t u32() { return take<std::uint32_t>(); }
    float f32() { return take<float>(); }
    Vec3 vec3() { return {f32(), f32(), f32()}; }
    Quat quat() {
        const float x = f32(), y = f32(), z = f32(), w = f32();
        return {x, y, z, w};
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

private:
    template <typename T>
    T take() {
        if (remaining() < sizeof(T)) throw WireError("truncated payload");
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace physlink::wire
