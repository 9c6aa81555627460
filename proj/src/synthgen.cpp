// Copyright (c) 2026 spkcodes authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spkcodes/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "spkcodes/util.hpp"

namespace spk {

using nlohmann::json;

namespace {

constexpr int kBaseWidth = 16;  // hidden width of the frozen base function

// Frames are laid out speaker by speaker (seen first), split by split, in
// this fixed order; draw order matches so datasets are byte-reproducible.
const Split kSplitOrder[3] = {Split::train, Split::valid, Split::test};

std::string speaker_name(bool seen, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s%02d", seen ? "s" : "u", i);
  return buf;
}

Vector tanh_vec(const Vector& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

void validate(const GenConfig& cfg) {
  auto pos = [](int v, const char* what) {
    if (v < 1) {
      throw ValidationError(std::string("gen config: ") + what +
                            " must be >= 1");
    }
  };
  pos(cfg.num_seen_speakers, "num_seen_speakers");
  pos(cfg.num_unseen_speakers, "num_unseen_speakers");
  pos(cfg.train_frames, "train_frames");
  pos(cfg.valid_frames, "valid_frames");
  pos(cfg.test_frames, "test_frames");
  pos(cfg.adapt_frames, "adapt_frames");
  pos(cfg.input_dim, "input_dim");
  pos(cfg.output_dim, "output_dim");
  if (cfg.noise_sigma < 0.0) {
    throw ValidationError("gen config: noise_sigma must be >= 0");
  }
}

}  // namespace

std::string variation_mode_name(VariationMode m) {
  switch (m) {
    case VariationMode::scale: return "scale";
    case VariationMode::bias: return "bias";
    case VariationMode::affine: return "affine";
  }
  throw ValidationError("unknown variation mode");
}

VariationMode variation_mode_from_name(const std::string& s) {
  if (s == "scale") return VariationMode::scale;
  if (s == "bias") return VariationMode::bias;
  if (s == "affine") return VariationMode::affine;
  throw ValidationError("unknown variation mode '" + s + "'");
}

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  throw ValidationError("unknown split");
}

Split split_from_name(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "valid") return Split::valid;
  if (s == "test") return Split::test;
  throw ValidationError("unknown split '" + s + "'");
}

Vector SynthModel::eval_base(const Vector& x) const {
  Vector h1 = tanh_vec(add(matvec(w1, x), b1));
  Vector h2 = tanh_vec(add(matvec(w2, h1), b2));
  return add(matvec(w3, h2), b3);
}

Vector SynthModel::eval_speaker(const SpeakerLatent& lat, const Vector& x) const {
  Vector g = eval_base(x);
  Vector y(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) y[i] = lat.alpha[i] * g[i] + lat.beta[i];
  return y;
}

bool SpeakerDataset::is_seen(const std::string& id) const {
  for (const auto& s : seen) {
    if (s == id) return true;
  }
  return false;
}

std::vector<const Frame*> SpeakerDataset::select(const std::string& speaker,
                                                 Split s) const {
  std::vector<const Frame*> out;
  for (const Frame& f : frames) {
    if (f.speaker == speaker && f.split == s) out.push_back(&f);
  }
  return out;
}

std::vector<const Frame*> SpeakerDataset::select_seen(Split s) const {
  std::vector<const Frame*> out;
  for (const Frame& f : frames) {
    if (f.split == s && is_seen(f.speaker)) out.push_back(&f);
  }
  return out;
}

SpeakerDataset generate(const GenConfig& cfg) {
  validate(cfg);
  SpeakerDataset ds;
  ds.cfg = cfg;
  Rng rng(cfg.seed);

  // Base function. Scales keep tanh units active and outputs near unit scale.
  SynthModel& m = ds.model;
  m.w1 = Matrix(kBaseWidth, std::size_t(cfg.input_dim));
  rng.fill_gaussian(m.w1, 0.0, 1.7 / std::sqrt(double(cfg.input_dim)));
  m.b1 = Vector(kBaseWidth);
  rng.fill_gaussian(m.b1, 0.0, 0.2);
  m.w2 = Matrix(kBaseWidth, kBaseWidth);
  rng.fill_gaussian(m.w2, 0.0, 1.6 / std::sqrt(double(kBaseWidth)));
  m.b2 = Vector(kBaseWidth);
  rng.fill_gaussian(m.b2, 0.0, 0.2);
  m.w3 = Matrix(std::size_t(cfg.output_dim), kBaseWidth);
  rng.fill_gaussian(m.w3, 0.0, 1.0 / std::sqrt(double(kBaseWidth)));
  m.b3 = Vector(std::size_t(cfg.output_dim));
  rng.fill_gaussian(m.b3, 0.0, 0.2);

  // Speaker latents. Both factors are always drawn, then masked by mode, so
  // the random stream lines up across modes.
  const int total = cfg.num_seen_speakers + cfg.num_unseen_speakers;
  for (int i = 0; i < total; ++i) {
    const bool is_seen = i < cfg.num_seen_speakers;
    const std::string id =
        speaker_name(is_seen, is_seen ? i : i - cfg.num_seen_speakers);
    SpeakerLatent lat;
    lat.alpha = Vector(std::size_t(cfg.output_dim));
    for (auto& a : lat.alpha) a = std::exp(rng.gaussian(0.0, 0.4));
    lat.beta = Vector(std::size_t(cfg.output_dim));
    rng.fill_gaussian(lat.beta, 0.0, 0.5);
    if (cfg.mode == VariationMode::scale) lat.beta = Vector(lat.beta.size(), 0.0);
    if (cfg.mode == VariationMode::bias) lat.alpha = Vector::ones(lat.alpha.size());
    (is_seen ? ds.seen : ds.unseen).push_back(id);
    ds.latents[id] = std::move(lat);
  }

  // Frames. The noise draw always happens so noise_sigma=0 only changes
  // values, not the stream.
  auto split_count = [&](bool seen, Split s) {
    switch (s) {
      case Split::train: return seen ? cfg.train_frames : cfg.adapt_frames;
      case Split::valid: return cfg.valid_frames;
      case Split::test: return cfg.test_frames;
    }
    return 0;
  };
  for (int i = 0; i < total; ++i) {
    const bool is_seen = i < cfg.num_seen_speakers;
    const std::string id =
        speaker_name(is_seen, is_seen ? i : i - cfg.num_seen_speakers);
    const SpeakerLatent& lat = ds.latents.at(id);
    for (Split s : kSplitOrder) {
      const int count = split_count(is_seen, s);
      for (int k = 0; k < count; ++k) {
        Frame f;
        f.speaker = id;
        f.split = s;
        f.x = Vector(std::size_t(cfg.input_dim));
        rng.fill_uniform(f.x, -1.0, 1.0);
        f.y = ds.model.eval_speaker(lat, f.x);
        for (auto& yv : f.y) yv += cfg.noise_sigma * rng.gaussian();
        ds.frames.push_back(std::move(f));
      }
    }
  }
  return ds;
}

double oracle_rmse_floor(const GenConfig& cfg) { return cfg.noise_sigma; }

namespace {

json vec_json(const Vector& v) { return json(v.v); }

Vector vec_from(const json& j) {
  Vector v;
  v.v = j.get<std::vector<double>>();
  return v;
}

json mat_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

Matrix mat_from(const json& j) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.a = j.at("data").get<std::vector<double>>();
  if (m.a.size() != m.rows * m.cols) {
    throw ValidationError("dataset meta: matrix payload does not match shape");
  }
  return m;
}

}  // namespace

std::string dataset_meta_json(const SpeakerDataset& ds) {
  const GenConfig& c = ds.cfg;
  json speakers = json::array();
  auto emit = [&](const std::string& id, bool seen) {
    const SpeakerLatent& lat = ds.latents.at(id);
    speakers.push_back(json{{"id", id},
                            {"seen", seen},
                            {"alpha", vec_json(lat.alpha)},
                            {"beta", vec_json(lat.beta)}});
  };
  for (const auto& id : ds.seen) emit(id, true);
  for (const auto& id : ds.unseen) emit(id, false);

  json j{{"format", "spkcodes-dataset-v1"},
         {"config",
          {{"num_seen_speakers", c.num_seen_speakers},
           {"num_unseen_speakers", c.num_unseen_speakers},
           {"train_frames", c.train_frames},
           {"valid_frames", c.valid_frames},
           {"test_frames", c.test_frames},
           {"adapt_frames", c.adapt_frames},
           {"input_dim", c.input_dim},
           {"output_dim", c.output_dim},
           {"mode", variation_mode_name(c.mode)},
           {"noise_sigma", c.noise_sigma},
           {"seed", c.seed}}},
         {"base_function",
          {{"w1", mat_json(ds.model.w1)},
           {"b1", vec_json(ds.model.b1)},
           {"w2", mat_json(ds.model.w2)},
           {"b2", vec_json(ds.model.b2)},
           {"w3", mat_json(ds.model.w3)},
           {"b3", vec_json(ds.model.b3)}}},
         {"speakers", std::move(speakers)}};
  return j.dump(1) + "\n";
}

std::string dataset_frames_csv(const SpeakerDataset& ds) {
  std::ostringstream out;
  out << "speaker,split";
  for (int i = 0; i < ds.cfg.input_dim; ++i) out << ",x" << i;
  for (int i = 0; i < ds.cfg.output_dim; ++i) out << ",y" << i;
  out << "\n";
  for (const Frame& f : ds.frames) {
    out << f.speaker << "," << split_name(f.split);
    for (double v : f.x) out << "," << format_g17(v);
    for (double v : f.y) out << "," << format_g17(v);
    out << "\n";
  }
  return out.str();
}

void save_dataset(const SpeakerDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir + "/meta.json", dataset_meta_json(ds));
  write_file(dir + "/frames.csv", dataset_frames_csv(ds));
}

SpeakerDataset load_dataset(const std::string& dir) {
  SpeakerDataset ds;
  json meta = json::parse(read_file(dir + "/meta.json"));
  if (meta.at("format").get<std::string>() != "spkcodes-dataset-v1") {
    throw ValidationError("unrecognized dataset format in " + dir);
  }
  const json& c = meta.at("config");
  ds.cfg.num_seen_speakers = c.at("num_seen_speakers").get<int>();
  ds.cfg.num_unseen_speakers = c.at("num_unseen_speakers").get<int>();
  ds.cfg.train_frames = c.at("train_frames").get<int>();
  ds.cfg.valid_frames = c.at("valid_frames").get<int>();
  ds.cfg.test_frames = c.at("test_frames").get<int>();
  ds.cfg.adapt_frames = c.at("adapt_frames").get<int>();
  ds.cfg.input_dim = c.at("input_dim").get<int>();
  ds.cfg.output_dim = c.at("output_dim").get<int>();
  ds.cfg.mode = variation_mode_from_name(c.at("mode").get<std::string>());
  ds.cfg.noise_sigma = c.at("noise_sigma").get<double>();
  ds.cfg.seed = c.at("seed").get<std::uint64_t>();
  const json& bf = meta.at("base_function");
  ds.model.w1 = mat_from(bf.at("w1"));
  ds.model.b1 = vec_from(bf.at("b1"));
  ds.model.w2 = mat_from(bf.at("w2"));
  ds.model.b2 = vec_from(bf.at("b2"));
  ds.model.w3 = mat_from(bf.at("w3"));
  ds.model.b3 = vec_from(bf.at("b3"));
  for (const json& sp : meta.at("speakers")) {
    const std::string id = sp.at("id").get<std::string>();
    const bool seen = sp.at("seen").get<bool>();
    (seen ? ds.seen : ds.unseen).push_back(id);
    SpeakerLatent lat;
    lat.alpha = vec_from(sp.at("alpha"));
    lat.beta = vec_from(sp.at("beta"));
    ds.latents[id] = std::move(lat);
  }

  std::istringstream in(read_file(dir + "/frames.csv"));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("frames.csv is empty");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Frame f;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, f.speaker, ',');
    std::getline(ls, tok, ',');
    f.split = split_from_name(tok);
    f.x = Vector(std::size_t(ds.cfg.input_dim));
    for (auto& v : f.x) {
      if (!std::getline(ls, tok, ',')) throw ValidationError("frames.csv: short row");
      v = std::strtod(tok.c_str(), nullptr);
    }
    f.y = Vector(std::size_t(ds.cfg.output_dim));
    for (auto& v : f.y) {
      if (!std::getline(ls, tok, ',')) throw ValidationError("frames.csv: short row");
      v = std::strtod(tok.c_str(), nullptr);
    }
    ds.frames.push_back(std::move(f));
  }
  return ds;
}

std::string dataset_hash(const SpeakerDataset& ds) {
  return sha256_hex(dataset_meta_json(ds) + dataset_frames_csv(ds));
}

}  // namespace spk
