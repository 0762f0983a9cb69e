"""Rate and noise-robustness analysis of gradient descent and Nesterov acceleration."""
