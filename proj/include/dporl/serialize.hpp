#pragma once

#include <iosfwd>
#include <string>

#include "dporl/count_release.hpp"
#include "dporl/mdp_core.hpp"

namespace dporl {

// Environment file format (plain text, whitespace separated, full double
// precision):
//   dporl-env 1
//   kind tabular|linear
//   dims S A H      (tabular)   |   dims S A H d   (linear)
//   d1   <S floats>
//   tabular: P <H*S*A*S floats row-major>, r <H*S*A floats>
//   linear:  phi <S*A*d>, nu <H*S*d>, theta <H*d>
// Dataset files carry one `traj h s a r s_next` line per transition after a
// `# traj h s a r s_next` header.

void write_tabular_mdp(std::ostream& os, const TabularMDP& mdp);
void write_linear_mdp(std::ostream& os, const LinearMDP& lin);
void save_tabular_mdp(const std::string& path, const TabularMDP& mdp);
void save_linear_mdp(const std::string& path, const LinearMDP& lin);

enum class EnvKind { tabular, linear };

struct LoadedEnv {
  EnvKind kind = EnvKind::tabular;
  TabularMDP tabular;
  LinearMDP linear;
};

LoadedEnv load_env(std::istream& is);
LoadedEnv load_env_file(const std::string& path);

void write_dataset(std::ostream& os, const Dataset& data);
Dataset read_dataset(std::istream& is);
void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset_file(const std::string& path);

// Debug dump of count tables: `sa h s a value` and `sas h s a s' value` lines.
void write_count_tables(std::ostream& os, const CountTables& t);

}  // namespace dporl
