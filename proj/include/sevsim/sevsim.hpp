#pragma once

#include "sevsim/aes128.hpp"
#include "sevsim/attack.hpp"
#include "sevsim/block.hpp"
#include "sevsim/engine.hpp"
#include "sevsim/errors.hpp"
#include "sevsim/gf2.hpp"
#include "sevsim/guest.hpp"
#include "sevsim/kdf.hpp"
#include "sevsim/memory.hpp"
#include "sevsim/randomness.hpp"
#include "sevsim/recovery.hpp"
#include "sevsim/rng.hpp"
#include "sevsim/tweak.hpp"
