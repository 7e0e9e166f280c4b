#include <doctest.h>

#include "noble/config.hpp"
#include "noble/error.hpp"

using namespace noble;

TEST_CASE("config parses key/value lines with comments") {
  const Config config = Config::parse(
      "# experiment\n"
      "tau = 0.2\n"
      "epochs=150\n"
      "  optimizer =  adam \n"
      "; trailing comment\n"
      "adjacency = on\n");
  CHECK(config.get_double("tau", 0.0) == doctest::Approx(0.2));
  CHECK(config.get_int("epochs", 0) == 150);
  CHECK(config.get_string("optimizer", "") == "adam");
  CHECK(config.get_bool("adjacency", false));
  CHECK(config.get_int("missing", 42) == 42);
}

TEST_CASE("config rejects malformed lines and values") {
  CHECK_THROWS_AS(Config::parse("this is not a pair\n"), ConfigError);
  const Config config = Config::parse("epochs = soon\n");
  CHECK_THROWS_AS(config.get_int("epochs", 0), ConfigError);
  CHECK_THROWS_AS(Config::parse("= value\n"), ConfigError);
}

TEST_CASE("config serialization round-trips") {
  Config config;
  config.set("tau", "0.4");
  config.set("seed", "7");
  const Config parsed = Config::parse(config.serialize());
  CHECK(parsed.values() == config.values());
}

TEST_CASE("train config extraction") {
  const Config config = Config::parse(
      "optimizer = sgd\n"
      "learning_rate = 0.05\n"
      "batch_size = 16\n"
      "epochs = 12\n"
      "seed = 99\n"
      "patience = 5\n");
  const TrainConfig tc = train_config_from(config);
  CHECK(tc.optimizer == OptimizerKind::sgd);
  CHECK(tc.learning_rate == doctest::Approx(0.05));
  CHECK(tc.batch_size == 16);
  CHECK(tc.epochs == 12);
  CHECK(tc.seed == 99);
  CHECK(tc.patience == 5);

  CHECK_THROWS_AS(train_config_from(Config::parse("optimizer = newton\n")),
                  ConfigError);
}
