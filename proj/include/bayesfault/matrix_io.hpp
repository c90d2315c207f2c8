#pragma once

#include <filesystem>
#include <iosfwd>

#include "bayesfault/kernel_model.hpp"

namespace bayesfault {

// Matrix files are headered CSV with a one-line preamble:
//   # transition_matrix rows=1 cols=5 n=1 k=1 d=2
//   x0^2,x0^1,u0^2,u0^1,const
//   0.5,-1.25,...
// Plain (non-kernel) matrices omit n/k/d and use c0..c{cols-1} headers.

void write_matrix(const TransitionMatrix& a, std::ostream& out);
void write_matrix(const TransitionMatrix& a, const std::filesystem::path& path);
TransitionMatrix read_matrix(std::istream& in);
TransitionMatrix read_matrix(const std::filesystem::path& path);

}  // namespace bayesfault
