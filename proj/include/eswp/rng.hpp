#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <sstream>
#include <string>

namespace eswp {

// Seeded random source with platform-stable output. mt19937_64 has a fully
// specified algorithm, and u01() maps raw 64-bit draws to doubles without
// going through std::uniform_real_distribution (whose output is
// implementation-defined), so identical seeds give identical streams on
// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Independent stream derived from (seed, stream) via splitmix64 mixing.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
        x = splitmix64(x);
        x = splitmix64(x);
        return Rng(x);
    }

    std::uint64_t next() { return gen_(); }

    // Uniform double in (0, 1]; never returns 0 so log(u) is finite.
    double u01() {
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) by rejection, bias-free.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    // Standard normal via Box-Muller on the stable u01 stream.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01();
        double u2 = u01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::string serialize() const {
        std::ostringstream os;
        os << gen_;
        os << ' ' << (have_spare_ ? 1 : 0) << ' ' << spare_bits();
        return os.str();
    }

    static Rng deserialize(const std::string& text) {
        Rng r(0);
        std::istringstream is(text);
        is >> r.gen_;
        int flag = 0;
        std::uint64_t bits = 0;
        is >> flag >> bits;
        r.have_spare_ = flag != 0;
        std::memcpy(&r.spare_, &bits, sizeof bits);
        return r;
    }

    bool operator==(const Rng& other) const {
        return gen_ == other.gen_ && have_spare_ == other.have_spare_ &&
               (!have_spare_ || spare_ == other.spare_);
    }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t spare_bits() const {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &spare_, sizeof bits);
        return bits;
    }

    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace eswp
