#pragma once

namespace besra {

int run_cli(int argc, char** argv);

}  // namespace besra
