#pragma once

#include <string>
#include <vector>

#include "linea/milp.hpp"

namespace linea {

/// Writes fixed-layout MPS: an "OBJ" objective row, INTORG/INTEND markers
/// around binary columns and an explicit bound for every column. Names longer
/// than eight characters are kept; the reader splits fields on whitespace.
/// Output depends only on the model, so repeated writes are byte-identical.
std::string write_mps(const MILPModel& model, const std::string& name = "LINEA");
MILPModel read_mps(const std::string& text);

/// Writes CPLEX-style LP text. Every column appears in the objective (with a
/// zero coefficient if need be) so that the reader recovers column order.
std::string write_lp(const MILPModel& model, const std::string& name = "LINEA");
MILPModel read_lp(const std::string& text);

/// Column and row names as the writers emit them: the model's own name when it
/// is a valid, unique identifier, otherwise C<j> or R<i>.
std::vector<std::string> exported_column_names(const MILPModel& model);
std::vector<std::string> exported_row_names(const MILPModel& model);

}  // namespace linea
