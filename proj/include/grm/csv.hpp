#pragma once

#include <string>

#include "grm/types.hpp"

namespace grm {

// Shortest text keeping full double precision (17 significant digits).
std::string format_double(double v);

// Item parameter CSV, header "item,a,b1,b2,b3,b4".
void write_items_csv(const std::string& path, const ItemSet& items);
ItemSet read_items_csv(const std::string& path);

// Long-form response CSV, header "subject,item,response"; ids from 0, every
// (subject, item) cell present exactly once.
void write_responses_csv(const std::string& path, const ResponseMatrix& data);
ResponseMatrix read_responses_csv(const std::string& path);

}  // namespace grm
