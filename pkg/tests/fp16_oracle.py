"""Bit-level IEEE-754 binary16 codec, written from the format definition.

Independent of numpy's half-precision support; used as the oracle for the
production quantizer.  Round-to-nearest, ties-to-even throughout.
"""

import struct


def decode_bits(bits: int) -> float:
    """Exact value of a binary16 bit pattern (as a Python float)."""
    sign = -1.0 if bits & 0x8000 else 1.0
    exp = (bits >> 10) & 0x1F
    mant = bits & 0x3FF
    if exp == 0x1F:
        return float("nan") if mant else sign * float("inf")
    if exp == 0:
        return sign * mant * 2.0**-24
    return sign * (1.0 + mant / 1024.0) * 2.0 ** (exp - 15)


def encode_float(value: float) -> int:
    """Binary16 bit pattern nearest to a float (RNE), via the float32 form."""
    (u32,) = struct.unpack("<I", struct.pack("<f", value))
    sign = (u32 >> 16) & 0x8000
    exp32 = (u32 >> 23) & 0xFF
    mant32 = u32 & 0x7FFFFF

    if exp32 == 0xFF:  # inf or nan
        if mant32:
            return sign | 0x7E00
        return sign | 0x7C00
    if exp32 == 0:  # float32 subnormal: far below binary16 resolution
        return sign

    e = exp32 - 127
    sig = 0x800000 | mant32  # value = sig * 2**(e-23), sig has 24 bits

    if e >= -14:
        # normal target: round sig to a multiple of 2**13 (10-bit mantissa)
        q, rem = sig >> 13, sig & 0x1FFF
        if rem > 0x1000 or (rem == 0x1000 and (q & 1)):
            q += 1
        if q == 0x800:  # mantissa carry: 1.111..11 rounded up to 10.000..0
            q = 0x400
            e += 1
        if e > 15:
            return sign | 0x7C00
        return sign | ((e + 15) << 10) | (q & 0x3FF)

    # subnormal target: result = q * 2**-24 with q = RNE(sig * 2**(e+1))
    shift = -(e + 1)
    if shift >= 64:
        return sign
    q, rem = sig >> shift, sig & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    if rem > half or (rem == half and (q & 1)):
        q += 1
    if q >= 0x400:  # rounded up into the normal range (2**-14)
        return sign | (1 << 10)
    return sign | q


def roundtrip(value: float) -> float:
    """Nearest binary16 value of a float, via the bit-level codec."""
    return decode_bits(encode_float(value))
