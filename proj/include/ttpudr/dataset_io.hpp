#pragma once

#include "ttpudr/evalbench.hpp"

#include <string>
#include <vector>

namespace ttpudr::io {

enum class DatasetFormat { kCsv, kRawTensor, kImageDir };

DatasetFormat parse_format(const std::string& name);

/// CSV rows are the flattened sample values followed by an integer label.
/// The tensor shape comes from `shape`, or from a leading "# shape: I1 I2 ..."
/// comment line, which takes precedence.
eval::LabeledDataset load_csv_dataset(const std::string& path, std::vector<Index> shape = {});

/// Raw tensor container: magic "TTDS", version byte, dtype byte (1 = little-
/// endian float64), mode count, shape, sample count, class count, then sample
/// data in linearization order and uint64 labels.
eval::LabeledDataset load_raw_dataset(const std::string& path);
void save_raw_dataset(const eval::LabeledDataset& data, const std::string& path);

/// Directory of per-class subfolders holding grayscale PGM images (P5 or
/// P2, maxval <= 255). Subfolders sorted by name define class indices 1..C.
eval::LabeledDataset load_image_dir_dataset(const std::string& path);

eval::LabeledDataset load_dataset(const std::string& path, DatasetFormat format,
                                  std::vector<Index> shape = {});

/// Features (columns) as CSV, one row per sample, for `transform`.
void save_matrix_csv(const Matrix& columns_are_samples, const std::string& path);

void save_confusion_csv(const eval::ConfusionMatrix& cm, const std::string& path);

}  // namespace ttpudr::io
