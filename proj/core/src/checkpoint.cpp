#include "ioc/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace ioc {

namespace {

void write_row(std::ostream& out, const auto& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i > 0) out << ' ';
    fmt::print(out, "{:.17g}", values[i]);
  }
  out << '\n';
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) write_row(out, Eigen::VectorXd(m.row(r).transpose()));
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) {
    throw std::runtime_error("checkpoint: expected '" + word + "', found '" + got + "'");
  }
}

template <typename T>
T read(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw std::runtime_error(std::string("checkpoint: cannot read ") + what);
  return v;
}

// Reads via strtod so inf/nan spellings written by fmt are accepted.
double read_double(std::istream& in) {
  const auto token = read<std::string>(in, "number");
  std::size_t used = 0;
  const double d = std::stod(token, &used);
  if (used != token.size()) throw std::runtime_error("checkpoint: bad number '" + token + "'");
  return d;
}

Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = read_double(in);
  }
  return m;
}

Eigen::VectorXd read_vector(std::istream& in, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = read_double(in);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Snapshot& snap) {
  const FeatureMap& f = snap.features;
  const auto& options = snap.params.options;
  out << "ioc-checkpoint 1\n";
  out << "env " << to_string(snap.env) << '\n';
  if (f.kind() == FeatureKind::kOneHot) {
    out << "features one_hot " << f.dimension() << '\n';
  } else {
    fmt::print(out, "features rbf_grid {} {} {} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", f.dimension(), f.nx(),
               f.ny(), f.bandwidth(), f.bounds().lo.x(), f.bounds().lo.y(), f.bounds().hi.x(), f.bounds().hi.y());
  }
  const double temperature = options.empty() ? 1.0 : options.front().intra_policy.temperature;
  fmt::print(out, "options {} actions {} temperature {:.17g}\n", options.size(), snap.num_actions, temperature);
  out << "policy " << to_string(snap.params.policy.kind()) << '\n';
  if (snap.params.policy.kind() == PolicyKind::kLearnedSoftmax) {
    fmt::print(out, "policy_weights {:.17g}\n", snap.params.policy.head().temperature);
    write_matrix(out, snap.params.policy.head().weights);
  }
  for (std::size_t w = 0; w < options.size(); ++w) {
    out << "option " << w << '\n';
    write_matrix(out, options[w].intra_policy.weights);
    write_row(out, options[w].termination.weights);
    write_row(out, options[w].interest.weights);
  }
  if (snap.critic) {
    const QUTable& qu = *snap.critic;
    fmt::print(out, "critic {:.17g}\n", qu.gamma());
    const auto dim = static_cast<Eigen::Index>(qu.dimension());
    for (Eigen::Index s = 0; s < dim; ++s) {
      Eigen::VectorXd row(qu.num_options() * qu.num_actions());
      Eigen::Index k = 0;
      for (int w = 0; w < qu.num_options(); ++w) {
        for (int a = 0; a < qu.num_actions(); ++a) row[k++] = qu.weights(w)(a, s);
      }
      write_row(out, row);
    }
  }
  out << "end\n";
}

Snapshot read_checkpoint(std::istream& in) {
  Snapshot snap;
  expect(in, "ioc-checkpoint");
  if (read<int>(in, "version") != 1) throw std::runtime_error("checkpoint: unsupported version");
  expect(in, "env");
  snap.env = parse_env_kind(read<std::string>(in, "env kind"));
  expect(in, "features");
  const auto kind = read<std::string>(in, "feature kind");
  const auto dim = read<std::size_t>(in, "dimension");
  if (kind == "one_hot") {
    snap.features = FeatureMap::one_hot(dim);
  } else if (kind == "rbf_grid") {
    const int nx = read<int>(in, "nx");
    const int ny = read<int>(in, "ny");
    const double bw = read_double(in);
    Rect bounds;
    bounds.lo.x() = read_double(in);
    bounds.lo.y() = read_double(in);
    bounds.hi.x() = read_double(in);
    bounds.hi.y() = read_double(in);
    snap.features = FeatureMap::rbf_grid(bounds, nx, ny, bw);
    if (snap.features.dimension() != dim) throw std::runtime_error("checkpoint: rbf dimension mismatch");
  } else {
    throw std::runtime_error("checkpoint: unknown feature kind '" + kind + "'");
  }
  const auto d = static_cast<Eigen::Index>(dim);

  expect(in, "options");
  const int n = read<int>(in, "option count");
  expect(in, "actions");
  snap.num_actions = read<int>(in, "action count");
  expect(in, "temperature");
  const double temperature = read_double(in);
  if (n < 1 || snap.num_actions < 1) throw std::runtime_error("checkpoint: empty option set");

  expect(in, "policy");
  const PolicyKind pkind = parse_policy_kind(read<std::string>(in, "policy kind"));
  if (pkind == PolicyKind::kFixedUniform) {
    snap.params.policy = PolicyOverOptions::fixed_uniform(n);
  } else {
    expect(in, "policy_weights");
    const double pt = read_double(in);
    snap.params.policy = PolicyOverOptions::learned_softmax(n, dim, pt);
    snap.params.policy.head().weights = read_matrix(in, n, d);
  }

  for (int w = 0; w < n; ++w) {
    expect(in, "option");
    if (read<int>(in, "option index") != w) throw std::runtime_error("checkpoint: options out of order");
    OptionParams opt;
    opt.intra_policy.temperature = temperature;
    opt.intra_policy.weights = read_matrix(in, snap.num_actions, d);
    opt.termination.weights = read_vector(in, d);
    opt.interest.weights = read_vector(in, d);
    snap.params.options.push_back(std::move(opt));
  }

  const auto tag = read<std::string>(in, "section");
  if (tag == "critic") {
    QUTable qu(n, snap.num_actions, dim, read_double(in));
    for (Eigen::Index s = 0; s < d; ++s) {
      for (int w = 0; w < n; ++w) {
        for (int a = 0; a < snap.num_actions; ++a) qu.weights(w)(a, s) = read_double(in);
      }
    }
    snap.critic = std::move(qu);
    expect(in, "end");
  } else if (tag != "end") {
    throw std::runtime_error("checkpoint: unexpected section '" + tag + "'");
  }
  return snap;
}

void save_checkpoint(const std::filesystem::path& path, const Snapshot& snap) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(out, snap);
}

Snapshot load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace ioc
