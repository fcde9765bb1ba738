#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cli/workspace.hpp"
#include "gtap/error.hpp"

namespace gtap::cli {

// `report` was asked to merge curves produced under different configs.
class HashMismatchError : public Error {
 public:
  using Error::Error;
};

void cmd_train(const Workspace& ws, std::ostream& out);
void cmd_bands(const Workspace& ws, std::ostream& out);
void cmd_prune(const Workspace& ws, std::ostream& out);
void cmd_curve(const Workspace& ws, std::ostream& out);
void cmd_oracle(const Workspace& ws, std::ostream& out);
void cmd_report(const Workspace& ws, std::ostream& out);

// Bias d for prune and curve: an explicit prune.bias_file wins over prune.d.
double resolve_bias(const Workspace& ws, std::string* source = nullptr);

}  // namespace gtap::cli
