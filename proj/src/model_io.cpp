#include "ckme/classifier.hpp"
#include "ckme/errors.hpp"
#include "ckme/random.hpp"
#include "ckme/text_io.hpp"

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace ckme {

namespace {

constexpr std::string_view kMagic = "CKME-MODEL";
constexpr const char* kSections[] = {"KERNEL", "W", "LINEAR", "META", "END"};

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += text::format_double(v[i]);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += v[i];
  }
  return out;
}

Vector parse_vector(std::string_view text, Eigen::Index expected, const std::string& what) {
  const auto fields = text::split(text, ',');
  if (static_cast<Eigen::Index>(fields.size()) != expected) {
    throw DataError("model file: " + what + " has " + std::to_string(fields.size()) + " values, expected " +
                    std::to_string(expected));
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    if (!text::parse_double(fields[i], v[i])) throw DataError("model file: bad number in " + what);
  }
  return v;
}

/// Ordered key=value lines of one section.
class Fields {
 public:
  Fields(std::string section, const std::vector<std::string_view>& lines) : section_(std::move(section)) {
    for (auto line : lines) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw DataError("model file: malformed line in [" + section_ + "]");
      entries_.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
  }

  /// Next field, which must carry `key`.
  const std::string& next(std::string_view key) {
    if (pos_ >= entries_.size()) {
      throw DataError("model file: [" + section_ + "] is missing field '" + std::string(key) + "'");
    }
    if (entries_[pos_].first != key) {
      throw DataError("model file: [" + section_ + "] expected field '" + std::string(key) + "', found '" +
                      entries_[pos_].first + "'");
    }
    return entries_[pos_++].second;
  }

  bool peek(std::string_view key) const { return pos_ < entries_.size() && entries_[pos_].first == key; }

  void finish() const {
    if (pos_ != entries_.size()) {
      throw DataError("model file: unexpected field '" + entries_[pos_].first + "' in [" + section_ + "]");
    }
  }

 private:
  std::string section_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::size_t pos_ = 0;
};

double to_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  if (!text::parse_double(s, v)) throw DataError("model file: bad number for " + what);
  return v;
}

long long to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw DataError("model file: bad integer for " + what);
    return v;
  } catch (const std::logic_error&) {
    throw DataError("model file: bad integer for " + what);
  }
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size() || s.empty() || s[0] == '-') throw DataError("model file: bad seed for " + what);
    return v;
  } catch (const std::logic_error&) {
    throw DataError("model file: bad seed for " + what);
  }
}

}  // namespace

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  const auto& rff = model.rff;
  out << kMagic << ' ' << kModelVersion << '\n';
  out << "[KERNEL]\n";
  out << "gamma=" << text::format_double(rff.gamma()) << '\n';
  out << "D=" << rff.D() << '\n';
  out << "d=" << rff.d() << '\n';
  out << "seed=" << rff.seed() << '\n';
  out << "generator=" << kGeneratorName << '\n';
  out << "[W]\n";
  for (Eigen::Index k = 0; k < rff.d(); ++k) out << join(Vector(rff.W().row(k).transpose())) << '\n';
  out << "[LINEAR]\n";
  out << "beta=" << join(model.beta) << '\n';
  out << "bias=" << text::format_double(model.bias) << '\n';
  out << "reg_c=" << text::format_double(model.reg_c) << '\n';
  const auto& meta = model.meta;
  out << "[META]\n";
  out << "markers=" << join(meta.marker_names) << '\n';
  out << "labels=" << meta.label_names[0] << ',' << meta.label_names[1] << '\n';
  out << "preprocessing=" << to_string(meta.preprocessing.kind) << '\n';
  out << "cofactor=" << text::format_double(meta.preprocessing.cofactor) << '\n';
  if (meta.preprocessing.standardizer) {
    out << "standardizer_mean=" << join(meta.preprocessing.standardizer->mean) << '\n';
    out << "standardizer_stddev=" << join(meta.preprocessing.standardizer->stddev) << '\n';
  }
  out << "subsample=" << to_string(meta.subsample) << '\n';
  out << "m=" << meta.m << '\n';
  out << "train_seed=" << meta.seed << '\n';
  out << "[END]\n";
  if (!out) throw DataError("write failed: " + path.string());
}

LinearModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("missing model file: " + path.string());
  const std::string content = text::read_file(path);
  std::vector<std::string_view> lines;
  for (auto line : text::split(content, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw DataError("model file is empty: " + path.string());
  const auto head = text::split(lines[0], ' ');
  if (head.size() != 2 || head[0] != kMagic) throw DataError("not a model file: " + path.string());
  if (head[1] != std::to_string(kModelVersion)) {
    throw DataError("unsupported model version '" + std::string(head[1]) + "' (this build reads version " +
                    std::to_string(kModelVersion) + ")");
  }

  std::map<std::string, std::vector<std::string_view>> body;
  std::size_t next_section = 0;
  std::string current;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.front() == '[' && line.back() == ']') {
      const std::string name(line.substr(1, line.size() - 2));
      if (next_section >= std::size(kSections) || name != kSections[next_section]) {
        const std::string want = next_section < std::size(kSections) ? kSections[next_section] : "end of file";
        throw DataError("model file: expected section [" + want + "], found [" + name + "]");
      }
      ++next_section;
      current = name;
      body[current];
      continue;
    }
    if (current.empty() || current == "END") throw DataError("model file: content outside a section");
    body[current].push_back(line);
  }
  if (next_section < std::size(kSections)) {
    throw DataError("model file truncated: missing section [" + std::string(kSections[next_section]) + "]");
  }

  Fields kernel("KERNEL", body["KERNEL"]);
  const double gamma = to_double(kernel.next("gamma"), "gamma");
  const auto D = static_cast<Eigen::Index>(to_int(kernel.next("D"), "D"));
  const auto d = static_cast<Eigen::Index>(to_int(kernel.next("d"), "d"));
  const std::uint64_t seed = to_u64(kernel.next("seed"), "seed");
  kernel.next("generator");
  kernel.finish();
  if (D < 2 || D % 2 != 0 || d < 1) throw DataError("model file: invalid kernel dimensions");

  const auto& wlines = body["W"];
  if (static_cast<Eigen::Index>(wlines.size()) != d) {
    throw DataError("model file: [W] has " + std::to_string(wlines.size()) + " rows, expected d = " + std::to_string(d));
  }
  Matrix W(d, D / 2);
  for (Eigen::Index k = 0; k < d; ++k) W.row(k) = parse_vector(wlines[k], D / 2, "W row " + std::to_string(k)).transpose();

  Fields linear("LINEAR", body["LINEAR"]);
  Vector beta = parse_vector(linear.next("beta"), D, "beta");
  const double bias = to_double(linear.next("bias"), "bias");
  const double reg_c = to_double(linear.next("reg_c"), "reg_c");
  linear.finish();

  Fields meta_fields("META", body["META"]);
  TrainMeta meta;
  for (auto m : text::split(meta_fields.next("markers"), ',')) meta.marker_names.emplace_back(m);
  if (static_cast<Eigen::Index>(meta.marker_names.size()) != d) {
    throw DataError("model file: marker list length does not match d");
  }
  const auto labels = text::split(meta_fields.next("labels"), ',');
  if (labels.size() != 2) throw DataError("model file: labels must list two names");
  meta.label_names = {std::string(labels[0]), std::string(labels[1])};
  try {
    meta.preprocessing.kind = parse_preprocess_kind(meta_fields.next("preprocessing"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  meta.preprocessing.cofactor = to_double(meta_fields.next("cofactor"), "cofactor");
  if (meta_fields.peek("standardizer_mean")) {
    Standardizer st;
    st.mean = parse_vector(meta_fields.next("standardizer_mean"), d, "standardizer_mean");
    st.stddev = parse_vector(meta_fields.next("standardizer_stddev"), d, "standardizer_stddev");
    meta.preprocessing.standardizer = std::move(st);
  }
  if (meta.preprocessing.kind == PreprocessKind::standardize && !meta.preprocessing.standardizer) {
    throw DataError("model file: standardize preprocessing without standardizer parameters");
  }
  try {
    meta.subsample = parse_subsample_method(meta_fields.next("subsample"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  meta.m = static_cast<Eigen::Index>(to_int(meta_fields.next("m"), "m"));
  meta.seed = to_u64(meta_fields.next("train_seed"), "train_seed");
  meta_fields.finish();

  return LinearModel{RffMap(std::move(W), gamma, seed), std::move(beta), bias, reg_c, std::move(meta)};
}

}  // namespace ckme
