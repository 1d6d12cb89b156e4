#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "generators.h"
#include "relparse/checkpoint.h"
#include "relparse/errors.h"
#include "relparse/model.h"

using namespace relparse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.d = 8;
  cfg.n_heads = 2;
  cfg.n_enc = 1;
  cfg.n_dec = 1;
  cfg.d_type = 2;
  cfg.formulation = Formulation::kEdgeMatrix;
  cfg.allow_copy_token = true;
  return cfg;
}

}  // namespace

TEST_CASE("tensor files round-trip exactly") {
  TempDir dir("relparse_ckpt_tensors");
  std::mt19937_64 rng(1);
  std::map<std::string, Tensor> entries = {{"a", testgen::random_tensor(rng, 3, 4)},
                                           {"b/c", Tensor::vector({1e-300, -0.0, 1e300})},
                                           {"s", Tensor::scalar(7.0)}};
  write_tensor_file(dir.file("t.bin"), entries);
  const auto back = read_tensor_file(dir.file("t.bin"));
  REQUIRE(back.size() == 3);
  for (const auto& [name, t] : entries) {
    CHECK(back.at(name).shape() == t.shape());
    CHECK(std::equal(t.data().begin(), t.data().end(), back.at(name).data().begin()));
  }
}

TEST_CASE("corrupt and mismatched checkpoints are rejected") {
  TempDir dir("relparse_ckpt_bad");
  {
    std::ofstream out(dir.file("junk.bin"), std::ios::binary);
    out << "NOTACKPTxxxxxxxxxxxx";
  }
  CHECK_THROWS_AS(read_tensor_file(dir.file("junk.bin")), InputError);
  CHECK_THROWS_AS(read_tensor_file(dir.file("missing.bin")), InputError);

  ParamStore a(1);
  a.add_uniform("w", {2, 2});
  save_checkpoint(dir.file("a.ckpt"), a);
  {
    // Truncate the payload.
    const auto size = fs::file_size(dir.file("a.ckpt"));
    fs::resize_file(dir.file("a.ckpt"), size - 4);
  }
  ParamStore same(2);
  same.add_uniform("w", {2, 2});
  CHECK_THROWS_AS(load_checkpoint(dir.file("a.ckpt"), same), InputError);

  save_checkpoint(dir.file("a.ckpt"), a);
  ParamStore other_shape(2);
  other_shape.add_uniform("w", {2, 3});
  CHECK_THROWS_AS(load_checkpoint(dir.file("a.ckpt"), other_shape), InputError);
  ParamStore extra(2);
  extra.add_uniform("w", {2, 2});
  extra.add_uniform("v", {1});
  CHECK_THROWS_AS(load_checkpoint(dir.file("a.ckpt"), extra), InputError);
  load_checkpoint(dir.file("a.ckpt"), same);
  CHECK(same.get("w")[3] == a.get("w")[3]);
}

TEST_CASE("adam state round-trips") {
  TempDir dir("relparse_ckpt_adam");
  AdamState s;
  s.step_count = 17;
  s.beta2 = 0.999;
  s.first_moment["x"] = {1.0, 2.0};
  s.second_moment["x"] = {3.0, 4.0};
  save_adam_state(dir.file("o.opt"), s);
  const AdamState back = load_adam_state(dir.file("o.opt"));
  CHECK(back.step_count == 17);
  CHECK(back.beta2 == 0.999);
  CHECK(back.first_moment == s.first_moment);
  CHECK(back.second_moment == s.second_moment);
}

TEST_CASE("a saved model reloads with identical parameters, vocabularies and parses") {
  TempDir dir("relparse_ckpt_model");
  Model m(small_config(), testgen::toy_vocabularies({}));
  std::mt19937_64 rng(5);
  testgen::randomize_parameters(m.params(), rng);
  m.save(dir.path.string());
  const Model back = Model::load(dir.path.string());
  CHECK(back.config().formulation == Formulation::kEdgeMatrix);
  CHECK(back.config().allow_copy_token);
  CHECK(back.vocabs().tokens.symbols() == m.vocabs().tokens.symbols());
  CHECK(back.vocabs().outputs.symbols() == m.vocabs().outputs.symbols());
  for (const auto& [name, t] : m.params().all()) {
    const Tensor& u = back.params().get(name);
    CHECK(std::equal(t.data().begin(), t.data().end(), u.data().begin()));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const GraphInput g = testgen::random_graph(rng, {});
    CHECK(m.parse(g, 8) == back.parse(g, 8));
  }
  CHECK_THROWS_AS(Model::load((dir.path / "nowhere").string()), InputError);
}
