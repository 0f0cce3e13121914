#include "ttpudr/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ttpudr::io {

namespace fs = std::filesystem;

DatasetFormat parse_format(const std::string& name) {
    if (name == "csv") {
        return DatasetFormat::kCsv;
    }
    if (name == "raw" || name == "raw-tensor") {
        return DatasetFormat::kRawTensor;
    }
    if (name == "image-dir" || name == "images") {
        return DatasetFormat::kImageDir;
    }
    throw ConfigError("unknown dataset format '" + name + "' (csv, raw, image-dir)");
}

namespace {

std::vector<double> parse_csv_row(const std::string& line) {
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            values.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw DataError("non-numeric CSV cell '" + cell + "'");
        }
    }
    return values;
}

void finalize(eval::LabeledDataset& data) {
    int max_label = 0;
    for (int l : data.labels) {
        if (l < 1) {
            throw DataError("labels must be positive integers");
        }
        max_label = std::max(max_label, l);
    }
    data.num_classes = max_label;
    data.validate();
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) {
        throw DataError("unexpected end of dataset stream");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return v;
}

constexpr char kMagic[4] = {'T', 'T', 'D', 'S'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kDtypeFloat64 = 1;

}  // namespace

eval::LabeledDataset load_csv_dataset(const std::string& path, std::vector<Index> shape) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    eval::LabeledDataset data;
    data.provenance = path;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '\r') {
            continue;
        }
        if (line[0] == '#') {
            const auto pos = line.find("shape:");
            if (pos != std::string::npos) {
                shape.clear();
                std::stringstream ss(line.substr(pos + 6));
                Index v = 0;
                while (ss >> v) {
                    shape.push_back(v);
                }
            }
            continue;
        }
        if (shape.empty()) {
            throw DataError("CSV dataset needs a declared tensor shape "
                            "(--shape or a '# shape: ...' header line)");
        }
        auto values = parse_csv_row(line);
        Index expected = 1;
        for (Index s : shape) {
            expected *= s;
        }
        if (static_cast<Index>(values.size()) != expected + 1) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected) + " values plus a label, got " +
                            std::to_string(values.size()));
        }
        const double label_raw = values.back();
        values.pop_back();
        const int label = static_cast<int>(std::llround(label_raw));
        if (std::abs(label_raw - label) > 1e-9) {
            throw DataError("line " + std::to_string(line_no) + ": label is not an integer");
        }
        data.samples.emplace_back(shape, std::move(values));
        data.labels.push_back(label);
    }
    if (data.samples.empty()) {
        throw DataError("no samples in " + path);
    }
    finalize(data);
    return data;
}

eval::LabeledDataset load_raw_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError(path + " is not a raw tensor dataset (bad magic)");
    }
    const int version = in.get();
    if (version != kVersion) {
        throw DataError("unsupported dataset version " + std::to_string(version));
    }
    const int dtype = in.get();
    if (dtype != kDtypeFloat64) {
        throw DataError("unsupported dtype code " + std::to_string(dtype));
    }
    const auto n_modes = static_cast<Index>(read_u64(in));
    if (n_modes < 1 || n_modes > 64) {
        throw DataError("implausible mode count " + std::to_string(n_modes));
    }
    std::vector<Index> shape(static_cast<std::size_t>(n_modes));
    Index elements = 1;
    for (auto& s : shape) {
        s = static_cast<Index>(read_u64(in));
        if (s < 1) {
            throw DataError("nonpositive mode size in dataset header");
        }
        elements *= s;
    }
    const auto n = static_cast<Index>(read_u64(in));
    const auto c = static_cast<int>(read_u64(in));
    if (n < 1 || c < 1) {
        throw DataError("empty dataset header");
    }

    eval::LabeledDataset data;
    data.provenance = path;
    data.num_classes = c;
    for (Index i = 0; i < n; ++i) {
        std::vector<double> values(static_cast<std::size_t>(elements));
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!in) {
            throw DataError("truncated sample data in " + path);
        }
        data.samples.emplace_back(shape, std::move(values));
    }
    for (Index i = 0; i < n; ++i) {
        data.labels.push_back(static_cast<int>(read_u64(in)));
    }
    data.validate();
    return data;
}

void save_raw_dataset(const eval::LabeledDataset& data, const std::string& path) {
    data.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open " + path + " for writing");
    }
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    out.put(static_cast<char>(kDtypeFloat64));
    const auto& shape = data.samples.front().shape();
    write_u64(out, static_cast<std::uint64_t>(shape.size()));
    for (Index s : shape) {
        write_u64(out, static_cast<std::uint64_t>(s));
    }
    write_u64(out, static_cast<std::uint64_t>(data.sample_count()));
    write_u64(out, static_cast<std::uint64_t>(data.num_classes));
    for (const DenseTensor& t : data.samples) {
        out.write(reinterpret_cast<const char*>(t.data().data()),
                  static_cast<std::streamsize>(t.data().size() * sizeof(double)));
    }
    for (int l : data.labels) {
        write_u64(out, static_cast<std::uint64_t>(l));
    }
    if (!out) {
        throw DataError("failed to write " + path);
    }
}

namespace {

DenseTensor load_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string token;
    const auto next_token = [&]() -> std::string {
        std::string t;
        while (in >> t) {
            if (t[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return t;
        }
        throw DataError("truncated PGM header in " + path.string());
    };
    const std::string magic = next_token();
    if (magic != "P5" && magic != "P2") {
        throw DataError(path.string() + ": only P2/P5 PGM images supported");
    }
    const Index width = std::stoll(next_token());
    const Index height = std::stoll(next_token());
    const Index maxval = std::stoll(next_token());
    if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
        throw DataError(path.string() + ": unsupported PGM geometry or depth");
    }
    DenseTensor img({height, width});
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> buf(static_cast<std::size_t>(width * height));
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!in) {
            throw DataError(path.string() + ": truncated pixel data");
        }
        for (Index r = 0; r < height; ++r) {
            for (Index c = 0; c < width; ++c) {
                img({r, c}) = static_cast<double>(buf[static_cast<std::size_t>(r * width + c)]);
            }
        }
    } else {
        for (Index r = 0; r < height; ++r) {
            for (Index c = 0; c < width; ++c) {
                img({r, c}) = std::stod(next_token());
            }
        }
    }
    return img;
}

}  // namespace

eval::LabeledDataset load_image_dir_dataset(const std::string& path) {
    if (!fs::is_directory(path)) {
        throw DataError(path + " is not a directory");
    }
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_directory()) {
            class_dirs.push_back(entry.path());
        }
    }
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) {
        throw DataError("no class subdirectories under " + path);
    }
    eval::LabeledDataset data;
    data.provenance = path;
    data.num_classes = static_cast<int>(class_dirs.size());
    for (std::size_t c = 0; c < class_dirs.size(); ++c) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(class_dirs[c])) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            data.samples.push_back(load_pgm(f));
            data.labels.push_back(static_cast<int>(c) + 1);
        }
    }
    if (data.samples.empty()) {
        throw DataError("no images under " + path);
    }
    data.validate();
    return data;
}

eval::LabeledDataset load_dataset(const std::string& path, DatasetFormat format,
                                  std::vector<Index> shape) {
    switch (format) {
        case DatasetFormat::kCsv:
            return load_csv_dataset(path, std::move(shape));
        case DatasetFormat::kRawTensor:
            return load_raw_dataset(path);
        case DatasetFormat::kImageDir:
            return load_image_dir_dataset(path);
    }
    throw ConfigError("unreachable dataset format");
}

void save_matrix_csv(const Matrix& columns_are_samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open " + path + " for writing");
    }
    out.precision(17);
    for (Index j = 0; j < columns_are_samples.cols(); ++j) {
        for (Index i = 0; i < columns_are_samples.rows(); ++i) {
            out << (i ? "," : "") << columns_are_samples(i, j);
        }
        out << "\n";
    }
}

void save_confusion_csv(const eval::ConfusionMatrix& cm, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open " + path + " for writing");
    }
    for (Index r = 0; r < cm.counts.rows(); ++r) {
        for (Index c = 0; c < cm.counts.cols(); ++c) {
            out << (c ? "," : "") << cm.counts(r, c);
        }
        out << "\n";
    }
}

}  // namespace ttpudr::io
