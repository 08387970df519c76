"""k-anonymous face de-identification with a Siamese-guided conditional GAN.

Library layout:
  nn          tensor engine with reverse-mode autodiff and Adam
  precision   emulated binary16 training (loss scaling, master weights)
  models      toy generator / critic / Siamese encoder
  losses      adversarial, classification, gradient-penalty, similarity terms
  ksame       identity clustering, auto labelling, surrogate construction
  training    alternating critic/generator loop
  hypertune   random / particle-swarm / density-ratio search
  evaluation  sharpness and re-identification measurements
  data, netpbm, checkpoint, config, cli  artifact plumbing
"""

__version__ = "0.1.0"
