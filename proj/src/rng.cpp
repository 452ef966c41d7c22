#include "maernav/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "maernav/error.hpp"

namespace maernav {

double Rng::normal()
{
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n)
{
    const unsigned __int128 wide = static_cast<unsigned __int128>(engine_()) * n;
    return static_cast<std::size_t>(wide >> 64);
}

std::string Rng::state() const
{
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void Rng::set_state(const std::string& s)
{
    std::istringstream is(s);
    std::mt19937_64 e;
    is >> e;
    if (is.fail())
        throw Error(ErrorKind::Parse, "corrupt rng state");
    engine_ = e;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace maernav
