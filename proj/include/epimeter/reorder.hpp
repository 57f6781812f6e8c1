#pragma once

#include "epimeter/dataset.hpp"

namespace epimeter {

// Record direction for conditional datasets. Forward is the identity;
// reverse physically swaps the input and target blocks of every record
// (tokens, mask, and roles move together, so the old target becomes the
// new input prefix). Applying reverse twice restores the original.
enum class Direction { forward, reverse };

Dataset reorder(const Dataset& ds, Direction dir);

}  // namespace epimeter
