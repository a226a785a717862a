#pragma once

#include <string>

#include "hmc/hierarchy.hpp"

namespace hmc {

// Minimal OBO reader: `[Term]` stanzas only; class from `id:`, edges from
// `is_a:` lines (ancestor -> term), obsolete terms dropped, every other
// relationship type ignored. Dangling `is_a` references and cyclic results
// are errors.
Hierarchy parse_obo_lite(const std::string& text);

Hierarchy load_obo_file(const std::string& path);

}  // namespace hmc
