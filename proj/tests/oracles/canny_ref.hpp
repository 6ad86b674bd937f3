#pragma once
#include <cstdint>
#include <vector>

namespace umt::test {

/// Reference Canny edge detector, kept deliberately separate from the
/// library implementation. Golden fixtures are produced by this code; the
/// production detector must match it bit for bit.
///
/// Pinned numeric contract shared by both implementations (bit-equality
/// depends on it, comparisons are exact):
///  1. Gaussian weights w(dy,dx) = exp(-(dx^2+dy^2)/(2 sigma^2)) accumulated
///     row-major over the kernel window, then divided by their sum.
///  2. Blur accumulates in the same row-major kernel order with mirrored
///     (border-excluding) reflection.
///  3. Sobel kx = [-1 0 1; -2 0 2; -1 0 1], ky = kx^T with +1 row below
///     (y grows downward), reflect padding, row-major accumulation.
///  4. Magnitude sqrt(gx^2+gy^2); direction atan2(gy, gx) folded into
///     [0, pi); sectors split at pi/8, 3pi/8, 5pi/8, 7pi/8 (half-open).
///  5. Non-maximum suppression keeps a pixel when its magnitude is >= both
///     neighbors along the sector offset; out-of-bounds neighbors count 0.
///  6. Thresholds are relative to the max magnitude over the whole map
///     before suppression. A max of 1e-12 or below returns all zeros: Sobel
///     of a constant image leaves ~1e-17 rounding residue (3c is not exactly
///     representable), which must not be scaled up into edges.
///  7. Hysteresis: 8-connected flood from strong pixels through weak ones.
std::vector<std::uint8_t> canny_reference(const std::vector<double>& gray,
                                          int h, int w, double sigma = 1.4,
                                          int kernel = 5, double low = 0.1,
                                          double high = 0.3);

}  // namespace umt::test
