#include "rek/model_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace rek {

namespace {

constexpr char kRekmMagic[4] = {'R', 'E', 'K', 'M'};
constexpr uint16_t kRekmVersion = 1;

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

PersistedSvr persist_one(const SvrModel& model, const SvrHyperparams& hp, size_t n_f,
                         const FeatureLookup& features) {
  PersistedSvr p;
  p.target = model.target_kind;
  p.kernel = model.kernel;
  p.C = hp.C;
  p.epsilon = hp.epsilon;
  p.bias = model.bias;
  p.train_n = model.n();
  p.support_indices.assign(model.support_indices.begin(), model.support_indices.end());
  p.support_beta.reserve(p.n_sv());
  for (size_t idx : model.support_indices) p.support_beta.push_back(model.beta[idx]);
  p.n_f = n_f;
  if (features) {
    p.support_features.reserve(p.n_sv() * n_f);
    for (size_t idx : model.support_indices) {
      const double* f = features(idx);
      if (!f) {
        p.support_features.clear();
        break;
      }
      p.support_features.insert(p.support_features.end(), f, f + n_f);
    }
    p.has_features = p.support_features.size() == p.n_sv() * n_f && p.n_sv() > 0;
  }
  return p;
}

void write_model_block(std::ofstream& os, const PersistedSvr& p) {
  put<uint8_t>(os, static_cast<uint8_t>(p.target));
  put<uint8_t>(os, static_cast<uint8_t>(p.kernel.kind));
  put<double>(os, p.kernel.gamma);
  put<uint32_t>(os, p.kernel.degree);
  put<double>(os, p.kernel.offset);
  put<double>(os, p.C);
  put<double>(os, p.epsilon);
  put<double>(os, p.bias);
  put<uint64_t>(os, p.train_n);
  put<uint64_t>(os, p.n_sv());
  for (size_t i = 0; i < p.n_sv(); ++i) {
    put<uint64_t>(os, p.support_indices[i]);
    put<double>(os, p.support_beta[i]);
  }
  put<uint8_t>(os, p.has_features ? 1 : 0);
  put<uint64_t>(os, p.n_f);
  if (p.has_features) {
    os.write(reinterpret_cast<const char*>(p.support_features.data()),
             static_cast<std::streamsize>(p.support_features.size() * sizeof(double)));
  }
}

PersistedSvr read_model_block(std::ifstream& is) {
  PersistedSvr p;
  p.target = static_cast<TargetKind>(get<uint8_t>(is));
  p.kernel.kind = static_cast<KernelKind>(get<uint8_t>(is));
  p.kernel.gamma = get<double>(is);
  p.kernel.degree = get<uint32_t>(is);
  p.kernel.offset = get<double>(is);
  p.C = get<double>(is);
  p.epsilon = get<double>(is);
  p.bias = get<double>(is);
  p.train_n = get<uint64_t>(is);
  const uint64_t n_sv = get<uint64_t>(is);
  if (!is || n_sv > p.train_n || p.train_n > (1ull << 32)) {
    throw Truncated("corrupt REKM model block");
  }
  p.support_indices.resize(n_sv);
  p.support_beta.resize(n_sv);
  for (uint64_t i = 0; i < n_sv; ++i) {
    p.support_indices[i] = get<uint64_t>(is);
    p.support_beta[i] = get<double>(is);
  }
  p.has_features = get<uint8_t>(is) != 0;
  p.n_f = get<uint64_t>(is);
  if (p.n_f > (1u << 20)) throw Truncated("corrupt REKM feature header");
  if (p.has_features) {
    p.support_features.resize(n_sv * p.n_f);
    is.read(reinterpret_cast<char*>(p.support_features.data()),
            static_cast<std::streamsize>(p.support_features.size() * sizeof(double)));
  }
  if (!is) throw Truncated("REKM file shorter than header claims");
  return p;
}

}  // namespace

ModelFile persist_models(const GazeModelPair& models, const SvrHyperparams& hp_pitch,
                         const SvrHyperparams& hp_yaw, uint32_t frac_bits, size_t n_f,
                         const FeatureLookup& features) {
  ModelFile f;
  f.frac_bits = frac_bits;
  f.pitch = persist_one(models.pitch_model, hp_pitch, n_f, features);
  f.yaw = persist_one(models.yaw_model, hp_yaw, n_f, features);
  return f;
}

void write_rekm(const std::string& path, const ModelFile& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kRekmMagic, 4);
  put<uint16_t>(os, kRekmVersion);
  put<uint32_t>(os, m.frac_bits);
  write_model_block(os, m.pitch);
  write_model_block(os, m.yaw);
  if (!os) throw IoError("write failed: " + path);
}

ModelFile read_rekm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kRekmMagic, 4) != 0) throw BadMagic("not a REKM file: " + path);
  const auto version = get<uint16_t>(is);
  if (version != kRekmVersion) {
    throw UnknownType("unsupported REKM version " + std::to_string(version));
  }
  ModelFile m;
  m.frac_bits = get<uint32_t>(is);
  m.pitch = read_model_block(is);
  m.yaw = read_model_block(is);
  return m;
}

namespace {

double predict_one(const PersistedSvr& p, const std::vector<double>& x,
                   const std::vector<double>& sv_self_dot, double x_self_dot) {
  double acc = p.bias;
  for (size_t s = 0; s < p.n_sv(); ++s) {
    const double* sv = p.support_features.data() + s * p.n_f;
    double dot = 0.0;
    for (size_t d = 0; d < p.n_f; ++d) dot += sv[d] * x[d];
    acc += p.support_beta[s] * kernel_entry(p.kernel, x_self_dot, dot, sv_self_dot[s]);
  }
  return acc;
}

std::vector<double> self_dots(const PersistedSvr& p) {
  std::vector<double> out(p.n_sv());
  for (size_t s = 0; s < p.n_sv(); ++s) {
    const double* sv = p.support_features.data() + s * p.n_f;
    double dot = 0.0;
    for (size_t d = 0; d < p.n_f; ++d) dot += sv[d] * sv[d];
    out[s] = dot;
  }
  return out;
}

}  // namespace

std::vector<std::array<double, 2>> predict_standalone(const ModelFile& m,
                                                      const RealDataset& test) {
  if (!m.pitch.has_features || !m.yaw.has_features) {
    throw InvalidConfig(
        "model file carries no support features (persisted after a private session); "
        "standalone prediction is not possible");
  }
  if (test.n_f != m.pitch.n_f) {
    throw DimensionMismatch("predict: dataset n_f " + std::to_string(test.n_f) +
                            " vs model n_f " + std::to_string(m.pitch.n_f));
  }
  const FixedPointCodec codec(m.frac_bits);
  const auto pitch_dots = self_dots(m.pitch);
  const auto yaw_dots = self_dots(m.yaw);

  std::vector<std::array<double, 2>> out(test.n);
  std::vector<double> x(test.n_f);
  for (size_t i = 0; i < test.n; ++i) {
    double x_dot = 0.0;
    for (size_t d = 0; d < test.n_f; ++d) {
      x[d] = codec.quantize(test.at(d, i));
      x_dot += x[d] * x[d];
    }
    out[i] = {predict_one(m.pitch, x, pitch_dots, x_dot),
              predict_one(m.yaw, x, yaw_dots, x_dot)};
  }
  return out;
}

namespace {

bool blocks_equivalent(const PersistedSvr& a, const PersistedSvr& b) {
  return a.target == b.target && a.kernel.kind == b.kernel.kind &&
         a.kernel.gamma == b.kernel.gamma && a.kernel.degree == b.kernel.degree &&
         a.kernel.offset == b.kernel.offset && a.C == b.C && a.epsilon == b.epsilon &&
         a.bias == b.bias && a.train_n == b.train_n &&
         a.support_indices == b.support_indices && a.support_beta == b.support_beta;
}

}  // namespace

bool models_equivalent(const ModelFile& a, const ModelFile& b) {
  return a.frac_bits == b.frac_bits && blocks_equivalent(a.pitch, b.pitch) &&
         blocks_equivalent(a.yaw, b.yaw);
}

}  // namespace rek
