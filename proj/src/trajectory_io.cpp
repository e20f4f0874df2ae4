#include "metalms/trajectory_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <sstream>

#include "metalms/csv.hpp"
#include "metalms/errors.hpp"

namespace metalms {

void write_trajectory_csv(const std::string& path, const Trajectory& traj, bool include_truth) {
  const bool truth = include_truth && traj.truth.has_value();
  const bool eps = truth && traj.truth->mismatch.size() == traj.length();
  std::vector<std::string> header{"t"};
  for (int j = 0; j < traj.regressor_dim(); ++j) header.push_back("x_" + std::to_string(j));
  header.push_back("y");
  if (truth) {
    for (Eigen::Index j = 0; j < traj.truth->beta.cols(); ++j) header.push_back("beta_" + std::to_string(j));
    header.push_back("w");
    if (eps) header.push_back("eps");
  }
  CsvWriter w(path, header);
  std::vector<CsvCell> cells;
  for (long t = 0; t < traj.length(); ++t) {
    cells.clear();
    cells.emplace_back(t);
    for (int j = 0; j < traj.regressor_dim(); ++j) cells.emplace_back(traj.x(t, j));
    cells.emplace_back(traj.y[t]);
    if (truth) {
      for (Eigen::Index j = 0; j < traj.truth->beta.cols(); ++j) cells.emplace_back(traj.truth->beta(t, j));
      cells.emplace_back(traj.truth->noise[t]);
      if (eps) cells.emplace_back(traj.truth->mismatch[t]);
    }
    w.row(cells);
  }
  w.close();
}

Trajectory read_trajectory_csv(const std::string& path) {
  const CsvDocument doc = read_csv(path);
  if (doc.column("t") != 0 || doc.column("y") < 0) throw InvalidInput("trajectory csv needs columns t,x_*,y");
  std::vector<int> xcols, bcols;
  for (int j = 0;; ++j) {
    const int c = doc.column("x_" + std::to_string(j));
    if (c < 0) break;
    xcols.push_back(c);
  }
  for (int j = 0;; ++j) {
    const int c = doc.column("beta_" + std::to_string(j));
    if (c < 0) break;
    bcols.push_back(c);
  }
  if (xcols.empty()) throw InvalidInput("trajectory csv has no regressor columns");
  const int ycol = doc.column("y");
  const int wcol = doc.column("w");
  const int ecol = doc.column("eps");
  const long T = static_cast<long>(doc.rows.size());
  Trajectory traj;
  traj.x.resize(T, static_cast<Eigen::Index>(xcols.size()));
  traj.y.resize(T);
  const bool truth = !bcols.empty() && wcol >= 0;
  HiddenTruth h;
  if (truth) {
    h.beta.resize(T, static_cast<Eigen::Index>(bcols.size()));
    h.noise.resize(T);
    if (ecol >= 0) h.mismatch.resize(T);
  }
  for (long t = 0; t < T; ++t) {
    const auto& r = doc.rows[t];
    if (static_cast<long>(parse_number(r[0])) != t) throw InvalidInput("trajectory csv rows must be ordered t = 0,1,...");
    for (std::size_t j = 0; j < xcols.size(); ++j) traj.x(t, static_cast<Eigen::Index>(j)) = parse_number(r[xcols[j]]);
    traj.y[t] = parse_number(r[ycol]);
    if (truth) {
      for (std::size_t j = 0; j < bcols.size(); ++j) h.beta(t, static_cast<Eigen::Index>(j)) = parse_number(r[bcols[j]]);
      h.noise[t] = parse_number(r[wcol]);
      if (ecol >= 0) h.mismatch[t] = parse_number(r[ecol]);
    }
  }
  if (truth) {
    // β_T is not serialized; the last increment is taken as zero.
    h.beta_final = T > 0 ? Eigen::VectorXd(h.beta.row(T - 1).transpose()) : Eigen::VectorXd();
    traj.truth = std::move(h);
  }
  return traj;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  boost::property_tree::ptree pt;
  pt.put("dataset.spec_id", m.spec_id);
  pt.put("dataset.spec_file", m.spec_file);
  pt.put("dataset.seed", m.seed);
  pt.put("dataset.N1", m.N1);
  pt.put("dataset.T", m.T);
  for (std::size_t i = 0; i < m.files.size(); ++i) {
    pt.put("trajectories.file_" + std::to_string(i), m.files[i]);
    pt.put("trajectories.seed_" + std::to_string(i), m.seeds.at(i));
  }
  try {
    boost::property_tree::write_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw IoError(std::string("cannot write manifest: ") + e.what());
  }
}

DatasetManifest read_manifest(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw IoError(std::string("cannot read manifest: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.spec_id = pt.get<std::string>("dataset.spec_id");
    m.spec_file = pt.get<std::string>("dataset.spec_file");
    m.seed = pt.get<std::uint64_t>("dataset.seed");
    m.N1 = pt.get<int>("dataset.N1");
    m.T = pt.get<long>("dataset.T");
    for (int i = 0; i < m.N1; ++i) {
      m.files.push_back(pt.get<std::string>("trajectories.file_" + std::to_string(i)));
      m.seeds.push_back(pt.get<std::uint64_t>("trajectories.seed_" + std::to_string(i)));
    }
  } catch (const boost::property_tree::ptree_error& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

DatasetManifest write_dataset(const std::string& dir, const MultiTrajectoryDataset& ds,
                              const std::string& spec_file, bool include_truth) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "'");
  DatasetManifest m;
  m.spec_id = ds.spec ? ds.spec->id : "";
  m.spec_file = spec_file;
  m.seed = ds.master_seed;
  m.N1 = ds.count();
  m.T = ds.horizon();
  for (int i = 0; i < ds.count(); ++i) {
    std::ostringstream name;
    name << "trajectory_" << i << ".csv";
    write_trajectory_csv((std::filesystem::path(dir) / name.str()).string(), ds.trajectories[i], include_truth);
    m.files.push_back(name.str());
    m.seeds.push_back(ds.seeds.at(i));
  }
  write_manifest((std::filesystem::path(dir) / "manifest.ini").string(), m);
  return m;
}

}  // namespace metalms
