"""Independent numpy re-implementations used as references in model tests."""
import numpy as np


def linear(layer, x):
    return x @ layer.weight.detach().numpy().T + layer.bias.detach().numpy()


def vanilla_cross_attention(attn, queries, memory):
    """Plain multi-head scaled dot-product attention, no salience."""
    q, k, v = linear(attn.q_proj, queries), linear(attn.k_proj, memory), linear(attn.v_proj, memory)
    h, dh = attn.n_heads, attn.head_dim
    heads = []
    for i in range(h):
        sl = slice(i * dh, (i + 1) * dh)
        s = q[:, sl] @ k[:, sl].T / np.sqrt(dh)
        w = np.exp(s - s.max(axis=1, keepdims=True))
        w /= w.sum(axis=1, keepdims=True)
        heads.append(w @ v[:, sl])
    return linear(attn.o_proj, np.concatenate(heads, axis=1))


def central_difference(f, tensor, eps=1e-4):
    """Central finite differences of scalar ``f()`` w.r.t. every entry of ``tensor`` (modified in place)."""
    flat = tensor.data.view(-1)
    grad = np.zeros(flat.numel())
    for i in range(flat.numel()):
        orig = flat[i].item()
        flat[i] = orig + eps
        up = f()
        flat[i] = orig - eps
        down = f()
        flat[i] = orig
        grad[i] = (up - down) / (2 * eps)
    return grad.reshape(tuple(tensor.shape))
