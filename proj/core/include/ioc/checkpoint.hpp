#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ioc/critic.hpp"
#include "ioc/env.hpp"
#include "ioc/funcapprox.hpp"
#include "ioc/learner.hpp"

namespace ioc {

/// Parameter snapshot as written by `train` and read by `heatmap`.
///
/// Text format, whitespace separated, numbers printed with 17 significant
/// digits:
///
///   ioc-checkpoint 1
///   env <fourrooms|tmaze>
///   features one_hot <dim>
///   features rbf_grid <dim> <nx> <ny> <bandwidth> <lo.x> <lo.y> <hi.x> <hi.y>
///   options <n> actions <m> temperature <T>
///   policy <fixed_uniform|learned_softmax>
///   [policy_weights   followed by n rows of dim values]
///   option <i>        followed by m rows of dim values (theta),
///                     one row nu, one row z
///   [critic <gamma>   followed by dim rows of n*m values, ordered
///                     state, then option, then action]
///   end
struct Snapshot {
  EnvKind env = EnvKind::kFourRooms;
  FeatureMap features;
  int num_actions = 0;
  AgentParams params;
  std::optional<QUTable> critic;
};

void write_checkpoint(std::ostream& out, const Snapshot& snap);
Snapshot read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Snapshot& snap);
Snapshot load_checkpoint(const std::filesystem::path& path);

}  // namespace ioc
