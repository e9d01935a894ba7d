#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "minivella/diag.hpp"

namespace mv::rt {

// Checked fixed-width integer: widths 32/64/128/256, signed or unsigned.
// The value is stored as a 256-bit two's-complement quantity (sign- or
// zero-extended from its logical width), little-endian 64-bit limbs.
// Arithmetic is exact; results that do not fit the logical width raise
// RtError(Overflow). Nothing ever wraps silently.
struct WideInt {
    bool is_signed = true;
    int width = 32;  // bits: 32, 64, 128, 256
    std::array<uint64_t, 4> limbs{0, 0, 0, 0};

    static WideInt make(bool is_signed, int width, int64_t v);
    static WideInt zero(bool is_signed, int width) { return make(is_signed, width, 0); }

    // Decimal parse/print; parse fails (nullopt) when out of range or malformed.
    static std::optional<WideInt> from_decimal(bool is_signed, int width,
                                               const std::string& text);
    std::string to_decimal() const;

    bool negative() const { return is_signed && (limbs[3] >> 63); }
    bool is_zero() const;

    uint64_t low_u64() const { return limbs[0]; }

    bool operator==(const WideInt& o) const {
        return is_signed == o.is_signed && width == o.width && limbs == o.limbs;
    }
};

bool valid_int_width(int width);

// a and b must share (is_signed, width); callers are generated code or the
// typechecked interpreter, so that is an internal invariant.
WideInt wi_add(const WideInt& a, const WideInt& b);
WideInt wi_sub(const WideInt& a, const WideInt& b);
WideInt wi_mul(const WideInt& a, const WideInt& b);
WideInt wi_div(const WideInt& a, const WideInt& b);  // truncating, C semantics
WideInt wi_rem(const WideInt& a, const WideInt& b);

bool wi_lt(const WideInt& a, const WideInt& b);
bool wi_eq(const WideInt& a, const WideInt& b);

// Raw little-endian bytes of the logical width (width/8 bytes).
void wi_store_bytes(const WideInt& v, uint8_t* out);
WideInt wi_load_bytes(bool is_signed, int width, const uint8_t* in);

}  // namespace mv::rt
