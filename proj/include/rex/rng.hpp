#pragma once

#include <cmath>
#include <cstdint>

namespace rex {

// Counter-based generator: every draw is a pure function of (key, counter), so
// streams can be split per trajectory / per step and replayed independently of
// scheduling order. Mixing is the splitmix64 finalizer, which passes BigCrush
// as a counter mixer and is cheap enough to call once per draw.
class counter_rng {
  public:
    counter_rng() = default;
    explicit counter_rng(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Derives a child key; distinct substream ids give decorrelated streams.
    [[nodiscard]] counter_rng split(std::uint64_t substream) const {
        return counter_rng(mix(key_ ^ mix(substream + 0x632be59bd9b4e019ULL)));
    }

    [[nodiscard]] counter_rng split2(std::uint64_t a, std::uint64_t b) const {
        return split(a).split(b);
    }

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // Uniform on [0, 1): 53 mantissa bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return n ? next_u64() % n : 0;
    }

    // Standard normal via Box-Muller; the spare is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Index sampled from unnormalized nonnegative weights.
    template <class Container>
    std::size_t categorical(const Container& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        std::size_t last = 0;
        std::size_t i = 0;
        for (double w : weights) {
            if (w > 0.0) {
                last = i;
                if (u < w) return i;
                u -= w;
            }
            ++i;
        }
        return last;
    }

    [[nodiscard]] std::uint64_t key() const { return key_; }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace rex
