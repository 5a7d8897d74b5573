#pragma once

#include <stdexcept>
#include <string>

namespace ltflab
{

/*! \brief A circuit or gate violates a structural invariant (bad reference,
 * duplicate wire, wrong gate shape, ...). */
struct structural_error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/*! \brief An exact computation was requested beyond its feasible size. */
struct capacity_error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/*! \brief Malformed textual input (circuit files, CSV, config files). */
struct parse_error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

} // namespace ltflab
