#pragma once

#include "tiered_review/distributions.hpp"
#include "tiered_review/errors.hpp"
#include "tiered_review/estimator.hpp"
#include "tiered_review/generator.hpp"
#include "tiered_review/intervals.hpp"
#include "tiered_review/io.hpp"
#include "tiered_review/model.hpp"
#include "tiered_review/parallel.hpp"
#include "tiered_review/rng.hpp"
#include "tiered_review/study.hpp"
