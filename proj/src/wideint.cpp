#include "minivella/wideint.hpp"

#include <cstring>

namespace mv::rt {

bool valid_int_width(int width) {
    return width == 32 || width == 64 || width == 128 || width == 256;
}

namespace {

// Unsigned 512-bit magnitude, little-endian limbs. Wide enough for the
// product of two 256-bit operands; add/sub of magnitudes never overflow it.
struct Mag {
    std::array<uint64_t, 8> l{};

    bool is_zero() const {
        for (uint64_t x : l)
            if (x) return false;
        return true;
    }
};

int mag_cmp(const Mag& a, const Mag& b) {
    for (int i = 7; i >= 0; --i) {
        if (a.l[i] != b.l[i]) return a.l[i] < b.l[i] ? -1 : 1;
    }
    return 0;
}

Mag mag_add(const Mag& a, const Mag& b) {
    Mag r;
    unsigned __int128 carry = 0;
    for (int i = 0; i < 8; ++i) {
        unsigned __int128 s = (unsigned __int128)a.l[i] + b.l[i] + carry;
        r.l[i] = (uint64_t)s;
        carry = s >> 64;
    }
    return r;  // inputs <= 2^256, no carry out of limb 7
}

// requires a >= b
Mag mag_sub(const Mag& a, const Mag& b) {
    Mag r;
    uint64_t borrow = 0;
    for (int i = 0; i < 8; ++i) {
        unsigned __int128 av = a.l[i];
        unsigned __int128 bv = (unsigned __int128)b.l[i] + borrow;
        if (av >= bv) {
            r.l[i] = (uint64_t)(av - bv);
            borrow = 0;
        } else {
            r.l[i] = (uint64_t)(av + ((unsigned __int128)1 << 64) - bv);
            borrow = 1;
        }
    }
    return r;
}

// schoolbook product of the low 4 limbs of each operand
Mag mag_mul(const Mag& a, const Mag& b) {
    Mag r;
    for (int i = 0; i < 4; ++i) {
        unsigned __int128 carry = 0;
        for (int j = 0; j < 4; ++j) {
            unsigned __int128 cur =
                (unsigned __int128)a.l[i] * b.l[j] + r.l[i + j] + carry;
            r.l[i + j] = (uint64_t)cur;
            carry = cur >> 64;
        }
        r.l[i + 4] = (uint64_t)carry;
    }
    return r;
}

int mag_bit_length(const Mag& a) {
    for (int i = 7; i >= 0; --i) {
        if (a.l[i]) {
            int hi = 63;
            while (!(a.l[i] >> hi)) --hi;
            return i * 64 + hi + 1;
        }
    }
    return 0;
}

bool mag_get_bit(const Mag& a, int bit) {
    return (a.l[bit / 64] >> (bit % 64)) & 1;
}

void mag_set_bit(Mag& a, int bit) { a.l[bit / 64] |= (uint64_t)1 << (bit % 64); }

Mag mag_shl1(const Mag& a) {
    Mag r;
    uint64_t carry = 0;
    for (int i = 0; i < 8; ++i) {
        r.l[i] = (a.l[i] << 1) | carry;
        carry = a.l[i] >> 63;
    }
    return r;
}

// binary long division; b != 0
void mag_divmod(const Mag& a, const Mag& b, Mag& q, Mag& r) {
    q = Mag{};
    r = Mag{};
    int n = mag_bit_length(a);
    for (int bit = n - 1; bit >= 0; --bit) {
        r = mag_shl1(r);
        if (mag_get_bit(a, bit)) r.l[0] |= 1;
        if (mag_cmp(r, b) >= 0) {
            r = mag_sub(r, b);
            mag_set_bit(q, bit);
        }
    }
}

// divide by a small divisor in place, return remainder
uint64_t mag_divmod_small(Mag& a, uint64_t d) {
    unsigned __int128 rem = 0;
    for (int i = 7; i >= 0; --i) {
        unsigned __int128 cur = (rem << 64) | a.l[i];
        a.l[i] = (uint64_t)(cur / d);
        rem = cur % d;
    }
    return (uint64_t)rem;
}

bool mag_fits_bits(const Mag& m, int bits) {
    // m < 2^bits
    for (int i = 7; i >= 0; --i) {
        int lo = i * 64;
        if (lo >= bits) {
            if (m.l[i]) return false;
        } else {
            int inside = bits - lo;  // 1..64
            if (inside < 64 && (m.l[i] >> inside)) return false;
            break;
        }
    }
    return true;
}

bool mag_is_pow2_exact(const Mag& m, int bit) {
    Mag p;
    mag_set_bit(p, bit);
    return mag_cmp(m, p) == 0;
}

// sign + magnitude of a WideInt (magnitude of signed min is 2^(width-1))
void decompose(const WideInt& v, bool& neg, Mag& m) {
    neg = v.negative();
    std::array<uint64_t, 4> limbs = v.limbs;
    if (neg) {
        // two's complement negate
        uint64_t carry = 1;
        for (int i = 0; i < 4; ++i) {
            uint64_t inv = ~limbs[i];
            uint64_t s = inv + carry;
            carry = (s < inv) ? 1 : 0;
            limbs[i] = s;
        }
    }
    m = Mag{};
    for (int i = 0; i < 4; ++i) m.l[i] = limbs[i];
}

// Range-check (neg, m) against (is_signed, width) and build the stored
// 256-bit two's-complement limbs. Returns nullopt on overflow.
std::optional<WideInt> encode(bool is_signed, int width, bool neg, const Mag& m) {
    if (m.is_zero()) neg = false;
    if (!is_signed) {
        if (neg) return std::nullopt;
        if (!mag_fits_bits(m, width)) return std::nullopt;
    } else {
        bool ok = mag_fits_bits(m, width - 1) ||
                  (neg && mag_is_pow2_exact(m, width - 1));
        if (!ok) return std::nullopt;
    }
    WideInt r;
    r.is_signed = is_signed;
    r.width = width;
    for (int i = 0; i < 4; ++i) r.limbs[i] = m.l[i];
    if (neg) {
        uint64_t carry = 1;
        for (int i = 0; i < 4; ++i) {
            uint64_t inv = ~r.limbs[i];
            uint64_t s = inv + carry;
            carry = (s < inv) ? 1 : 0;
            r.limbs[i] = s;
        }
    }
    return r;
}

WideInt encode_or_throw(bool is_signed, int width, bool neg, const Mag& m) {
    auto r = encode(is_signed, width, neg, m);
    if (!r) throw RtError(RtErrorKind::Overflow, "integer overflow");
    return *r;
}

void check_same_kind(const WideInt& a, const WideInt& b) {
    if (a.is_signed != b.is_signed || a.width != b.width)
        throw RtError(RtErrorKind::Internal, "mixed integer kinds in arithmetic");
}

}  // namespace

WideInt WideInt::make(bool is_signed, int width, int64_t v) {
    WideInt r;
    r.is_signed = is_signed;
    r.width = width;
    uint64_t ext = v < 0 ? UINT64_MAX : 0;
    r.limbs = {(uint64_t)v, ext, ext, ext};
    return r;
}

bool WideInt::is_zero() const {
    for (uint64_t x : limbs)
        if (x) return false;
    return true;
}

std::optional<WideInt> WideInt::from_decimal(bool is_signed, int width,
                                             const std::string& text) {
    size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        neg = text[i] == '-';
        ++i;
    }
    if (i >= text.size()) return std::nullopt;
    Mag m;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c < '0' || c > '9') return std::nullopt;
        Mag ten;
        ten.l[0] = 10;
        m = mag_mul(m, ten);
        if (!mag_fits_bits(m, 257)) return std::nullopt;  // clearly out of range
        Mag digit;
        digit.l[0] = (uint64_t)(c - '0');
        m = mag_add(m, digit);
    }
    return encode(is_signed, width, neg, m);
}

std::string WideInt::to_decimal() const {
    bool neg;
    Mag m;
    decompose(*this, neg, m);
    if (m.is_zero()) return "0";
    std::string digits;
    while (!m.is_zero()) {
        uint64_t rem = mag_divmod_small(m, 10);
        digits.push_back((char)('0' + rem));
    }
    if (neg) digits.push_back('-');
    return std::string(digits.rbegin(), digits.rend());
}

WideInt wi_add(const WideInt& a, const WideInt& b) {
    check_same_kind(a, b);
    bool an, bn;
    Mag am, bm;
    decompose(a, an, am);
    decompose(b, bn, bm);
    bool rn;
    Mag rm;
    if (an == bn) {
        rn = an;
        rm = mag_add(am, bm);
    } else if (mag_cmp(am, bm) >= 0) {
        rn = an;
        rm = mag_sub(am, bm);
    } else {
        rn = bn;
        rm = mag_sub(bm, am);
    }
    return encode_or_throw(a.is_signed, a.width, rn, rm);
}

WideInt wi_sub(const WideInt& a, const WideInt& b) {
    check_same_kind(a, b);
    bool an, bn;
    Mag am, bm;
    decompose(a, an, am);
    decompose(b, bn, bm);
    bn = !bn;  // a + (-b)
    bool rn;
    Mag rm;
    if (an == bn) {
        rn = an;
        rm = mag_add(am, bm);
    } else if (mag_cmp(am, bm) >= 0) {
        rn = an;
        rm = mag_sub(am, bm);
    } else {
        rn = bn;
        rm = mag_sub(bm, am);
    }
    return encode_or_throw(a.is_signed, a.width, rn, rm);
}

WideInt wi_mul(const WideInt& a, const WideInt& b) {
    check_same_kind(a, b);
    bool an, bn;
    Mag am, bm;
    decompose(a, an, am);
    decompose(b, bn, bm);
    Mag rm = mag_mul(am, bm);
    return encode_or_throw(a.is_signed, a.width, an != bn, rm);
}

static void divmod_parts(const WideInt& a, const WideInt& b, bool& qn, Mag& qm,
                         bool& rn, Mag& rm) {
    check_same_kind(a, b);
    if (b.is_zero()) throw RtError(RtErrorKind::DivByZero, "division by zero");
    bool an, bn;
    Mag am, bm;
    decompose(a, an, am);
    decompose(b, bn, bm);
    mag_divmod(am, bm, qm, rm);
    qn = an != bn;  // truncation toward zero
    rn = an;        // remainder takes the dividend's sign
}

WideInt wi_div(const WideInt& a, const WideInt& b) {
    bool qn, rn;
    Mag qm, rm;
    divmod_parts(a, b, qn, qm, rn, rm);
    return encode_or_throw(a.is_signed, a.width, qn, qm);
}

WideInt wi_rem(const WideInt& a, const WideInt& b) {
    bool qn, rn;
    Mag qm, rm;
    divmod_parts(a, b, qn, qm, rn, rm);
    return encode_or_throw(a.is_signed, a.width, rn, rm);
}

bool wi_lt(const WideInt& a, const WideInt& b) {
    check_same_kind(a, b);
    if (a.is_signed) {
        bool an = a.negative(), bn = b.negative();
        if (an != bn) return an;
    }
    for (int i = 3; i >= 0; --i) {
        if (a.limbs[i] != b.limbs[i]) return a.limbs[i] < b.limbs[i];
    }
    return false;
}

bool wi_eq(const WideInt& a, const WideInt& b) {
    check_same_kind(a, b);
    return a.limbs == b.limbs;
}

void wi_store_bytes(const WideInt& v, uint8_t* out) {
    int nbytes = v.width / 8;
    for (int i = 0; i < nbytes; ++i)
        out[i] = (uint8_t)(v.limbs[i / 8] >> ((i % 8) * 8));
}

WideInt wi_load_bytes(bool is_signed, int width, const uint8_t* in) {
    WideInt r;
    r.is_signed = is_signed;
    r.width = width;
    int nbytes = width / 8;
    bool neg = is_signed && (in[nbytes - 1] & 0x80);
    r.limbs = {0, 0, 0, 0};
    if (neg) r.limbs = {UINT64_MAX, UINT64_MAX, UINT64_MAX, UINT64_MAX};
    for (int i = 0; i < nbytes; ++i) {
        r.limbs[i / 8] &= ~((uint64_t)0xff << ((i % 8) * 8));
        r.limbs[i / 8] |= (uint64_t)in[i] << ((i % 8) * 8);
    }
    return r;
}

}  // namespace mv::rt

namespace mv {

const char* rt_error_kind_name(RtErrorKind k) {
    switch (k) {
        case RtErrorKind::Overflow: return "Overflow";
        case RtErrorKind::DivByZero: return "DivByZero";
        case RtErrorKind::StackOverflow: return "StackOverflow";
        case RtErrorKind::StepLimitExceeded: return "StepLimitExceeded";
        case RtErrorKind::SerializationError: return "SerializationError";
        case RtErrorKind::DeserializationError: return "DeserializationError";
        case RtErrorKind::Internal: return "Internal";
    }
    return "Internal";
}

std::string format_diagnostic(const std::string& file, const Diagnostic& d) {
    std::string sev = d.severity == Severity::Error ? "error" : "warning";
    return file + ":" + std::to_string(d.loc.line) + ":" +
           std::to_string(d.loc.col) + ": " + sev + ": " + d.message;
}

}  // namespace mv
