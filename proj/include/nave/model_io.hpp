#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "nave/kmeans.hpp"
#include "nave/pca.hpp"
#include "nave/ward.hpp"

namespace nave {

using ClusterModel = std::variant<KMeansModel, WardModel, PcaModel>;

// Container layout, all integers little-endian:
//   "NAVEMDL1" | u32 kind (1 k-means, 2 Ward, 3 PCA) | u32 block count | u64 seed
//   then per block: u64 rows | u64 cols | rows*cols f32
// Values are stored as f32, so a reloaded model carries f32-rounded
// parameters. Ward models keep the merge list and cut centroids; fitted
// labels are recomputed from the merges.

std::string serialize_model(const ClusterModel& model);
ClusterModel parse_model(const std::string& bytes, const std::string& origin = "<memory>");

void save_model(const ClusterModel& model, const std::filesystem::path& path);
ClusterModel load_model(const std::filesystem::path& path);

}  // namespace nave
