#pragma once

#include <string>

#include "monolab/grid.hpp"

namespace monolab {

// Grid functions travel as {"version":"gfv1","d":...,"n":...,"values":[...]}.
std::string to_json(const GridFunctionND& f);
GridFunctionND gridnd_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Shortest decimal form that round-trips the exact double.
std::string format_double(double x);

}  // namespace monolab
