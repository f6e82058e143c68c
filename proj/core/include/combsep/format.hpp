#ifndef COMBSEP_FORMAT_HPP
#define COMBSEP_FORMAT_HPP

#include <string>

namespace combsep
{
// Shortest-form "%.17g" rendering used by every CSV export, so files are
// byte-reproducible and round-trip to the same double.
std::string format_double(double value);

} // namespace combsep

#endif // COMBSEP_FORMAT_HPP
