// Copyright 2026 The SEE Relation Extraction Authors.
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

// Umbrella header.
#pragma once

#include "see/attention.hpp"
#include "see/bag_classifier.hpp"
#include "see/cli.hpp"
#include "see/config.hpp"
#include "see/corpus.hpp"
#include "see/embeddings.hpp"
#include "see/entity_encoder.hpp"
#include "see/errors.hpp"
#include "see/evaluator.hpp"
#include "see/gradcheck.hpp"
#include "see/io.hpp"
#include "see/model.hpp"
#include "see/numerics.hpp"
#include "see/sentence_encoder.hpp"
#include "see/synth.hpp"
#include "see/trainer.hpp"
