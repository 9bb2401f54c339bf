#include "dporl/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dporl {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

void write_values(std::ostream& os, const char* label,
                  const std::vector<double>& v) {
  os << label;
  for (double x : v) os << ' ' << x;
  os << '\n';
}

std::vector<double> read_values(std::istream& is, const char* label,
                                std::size_t n) {
  std::string tag;
  is >> tag;
  require(tag == label, std::string("env file: expected section '") + label +
                            "', got '" + tag + "'");
  std::vector<double> v(n);
  for (double& x : v) {
    is >> x;
    require(static_cast<bool>(is), std::string("env file: truncated section ") + label);
  }
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), "cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot open for reading: " + path);
  return is;
}

}  // namespace

void write_tabular_mdp(std::ostream& os, const TabularMDP& mdp) {
  os << std::setprecision(17);
  os << "dporl-env 1\nkind tabular\ndims " << mdp.S << ' ' << mdp.A << ' '
     << mdp.H << '\n';
  write_values(os, "d1", mdp.d1);
  write_values(os, "P", mdp.P);
  write_values(os, "r", mdp.r);
}

void write_linear_mdp(std::ostream& os, const LinearMDP& lin) {
  os << std::setprecision(17);
  os << "dporl-env 1\nkind linear\ndims " << lin.S << ' ' << lin.A << ' '
     << lin.H << ' ' << lin.d << '\n';
  write_values(os, "d1", lin.d1);
  write_values(os, "phi", lin.phi);
  write_values(os, "nu", lin.nu);
  write_values(os, "theta", lin.theta);
}

void save_tabular_mdp(const std::string& path, const TabularMDP& mdp) {
  auto os = open_out(path);
  write_tabular_mdp(os, mdp);
}

void save_linear_mdp(const std::string& path, const LinearMDP& lin) {
  auto os = open_out(path);
  write_linear_mdp(os, lin);
}

LoadedEnv load_env(std::istream& is) {
  std::string magic, kind, tag;
  int version = 0;
  is >> magic >> version >> tag >> kind;
  require(magic == "dporl-env" && version == 1, "env file: bad header");
  require(tag == "kind" && (kind == "tabular" || kind == "linear"),
          "env file: bad kind");
  LoadedEnv env;
  is >> tag;
  require(tag == "dims", "env file: expected dims");
  if (kind == "tabular") {
    env.kind = EnvKind::tabular;
    TabularMDP& m = env.tabular;
    is >> m.S >> m.A >> m.H;
    require(static_cast<bool>(is) && m.S >= 1 && m.A >= 1 && m.H >= 1,
            "env file: bad dims");
    std::size_t sa = static_cast<std::size_t>(m.H) * m.S * m.A;
    m.d1 = read_values(is, "d1", m.S);
    m.P = read_values(is, "P", sa * m.S);
    m.r = read_values(is, "r", sa);
    m.validate();
  } else {
    env.kind = EnvKind::linear;
    LinearMDP& m = env.linear;
    is >> m.S >> m.A >> m.H >> m.d;
    require(static_cast<bool>(is) && m.S >= 1 && m.A >= 1 && m.H >= 1 && m.d >= 1,
            "env file: bad dims");
    m.d1 = read_values(is, "d1", m.S);
    m.phi = read_values(is, "phi", static_cast<std::size_t>(m.S) * m.A * m.d);
    m.nu = read_values(is, "nu", static_cast<std::size_t>(m.H) * m.S * m.d);
    m.theta = read_values(is, "theta", static_cast<std::size_t>(m.H) * m.d);
  }
  return env;
}

LoadedEnv load_env_file(const std::string& path) {
  auto is = open_in(path);
  return load_env(is);
}

void write_dataset(std::ostream& os, const Dataset& data) {
  os << std::setprecision(17);
  os << "# traj h s a r s_next\n";
  for (std::int64_t t = 0; t < data.count; ++t)
    for (int h = 0; h < data.H; ++h) {
      std::size_t i = data.idx(t, h);
      os << t << ' ' << h << ' ' << data.s[i] << ' ' << data.a[i] << ' '
         << data.r[i] << ' ' << data.s_next[i] << '\n';
    }
}

Dataset read_dataset(std::istream& is) {
  std::string line;
  struct Row {
    std::int64_t traj;
    int h, s, a, s_next;
    double r;
  };
  std::vector<Row> rows;
  int max_h = -1;
  std::int64_t max_traj = -1;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Row row{};
    ls >> row.traj >> row.h >> row.s >> row.a >> row.r >> row.s_next;
    require(static_cast<bool>(ls), "dataset file: malformed line: " + line);
    rows.push_back(row);
    max_h = std::max(max_h, row.h);
    max_traj = std::max(max_traj, row.traj);
  }
  require(!rows.empty(), "dataset file: no transitions");
  Dataset data;
  data.H = max_h + 1;
  data.count = max_traj + 1;
  std::size_t n = static_cast<std::size_t>(data.count) * data.H;
  require(rows.size() == n, "dataset file: missing transitions");
  data.s.resize(n);
  data.a.resize(n);
  data.s_next.resize(n);
  data.r.resize(n);
  for (const Row& row : rows) {
    std::size_t i = data.idx(row.traj, row.h);
    data.s[i] = row.s;
    data.a[i] = row.a;
    data.s_next[i] = row.s_next;
    data.r[i] = row.r;
  }
  return data;
}

void save_dataset(const std::string& path, const Dataset& data) {
  auto os = open_out(path);
  write_dataset(os, data);
}

Dataset load_dataset_file(const std::string& path) {
  auto is = open_in(path);
  return read_dataset(is);
}

void write_count_tables(std::ostream& os, const CountTables& t) {
  os << std::setprecision(17);
  os << "# table h s a [s'] value\n";
  for (int h = 0; h < t.H; ++h)
    for (int s = 0; s < t.S; ++s)
      for (int a = 0; a < t.A; ++a) {
        os << "sa " << h << ' ' << s << ' ' << a << ' '
           << t.sa[t.sa_idx(h, s, a)] << '\n';
        for (int s2 = 0; s2 < t.S; ++s2)
          os << "sas " << h << ' ' << s << ' ' << a << ' ' << s2 << ' '
             << t.sas[t.sas_idx(h, s, a, s2)] << '\n';
      }
}

}  // namespace dporl
