"""Manufactured-solution fields, generated by scripts/derive_manufactured.py.

Do not edit by hand.  Each function returns a dict of component lists;
matrix-valued entries are row-major.
"""

import numpy as np
from numpy import cos, exp, pi, sin


def ex51_fields(x1, x2, rho1=0.0, rho2=0.0):
    one = np.ones_like(x1)
    x0 = pi*x1
    x3 = sin(x0)
    x4 = x3**2
    x5 = 2*x4
    x6 = pi*x2
    x7 = cos(x6)
    x8 = sin(x6)
    x9 = x7*x8
    x10 = x5*x9
    x11 = pi*x10
    x12 = x8**2
    x13 = cos(x0)
    x14 = x13*x3
    x15 = x12*x14
    x16 = 2*x15
    x17 = -pi*x16
    x18 = pi**2
    x19 = 4*x18
    x20 = x14*x9
    x21 = x19*x20
    x22 = x7**2
    x23 = -x22
    x24 = x12 + x23
    x25 = -x18*x24*x5
    x26 = x13**2
    x27 = -x26
    x28 = x27 + x4
    x29 = 2*x18
    x30 = x12*x28*x29
    x31 = -x21
    x32 = x22*x4
    x33 = x12*x26
    x34 = pi**3
    x35 = 4*x34
    x36 = x14*(3*x12 + x23)
    x37 = x9*(x27 + 3*x4)
    x38 = 2*x0
    x39 = cos(x38)
    x40 = 2*x6
    x41 = cos(x40)
    x42 = x39*x41
    x43 = sin(x38)
    x44 = x43**2
    x45 = sin(x40)
    x46 = x41*x45
    x47 = x44*x46
    x48 = 4*pi
    x49 = x45**2
    x50 = x39*x43
    x51 = x49*x50
    x52 = 16*x18
    x53 = x43*x45
    x54 = x42*x53
    x55 = x52*x54
    x56 = x41**2
    x57 = -x56
    x58 = x49 + x57
    x59 = 8*x18
    x60 = x39**2
    x61 = -x60
    x62 = x49*(x44 + x61)
    x63 = x44*x56
    x64 = x49*x60
    x65 = -2*x44*x49 + x63 + x64
    x66 = 32*x34
    x67 = x50*(3*x49 + x57)
    x68 = x46*(3*x44 + x61)
    x69 = 2*x41*x43
    x70 = x4*x9
    x71 = (999/125)*x6
    x72 = x12*x13*x3**3
    x73 = (999/500)*x32 - 999/500*x33
    x74 = 999*x1*x2 + 1
    x75 = x18*x74
    x76 = (1/250)*x75
    x77 = 2*x39*x45
    x78 = x8**3
    x79 = x44*x49
    x80 = (999/125)*x0
    x81 = (999/250)*x51
    x82 = (1998/125)*x54
    x83 = 32*x18
    x84 = rho1*x83
    x85 = x54*x83
    x86 = (4/125)*x75
    x87 = (999/125)*x65
    x88 = (999/250)*x47
    x89 = 2*pi
    x90 = (1/125)*pi*x65
    out = {}
    out['y'] = [(x11) * one, (x17) * one]
    out['grad_y'] = [(x21) * one, (x25) * one, (x30) * one, (x31) * one]
    out['omega'] = [(x29*(2*x12*x4 - x32 - x33)) * one]
    out['grad_omega'] = [(x35*x36) * one, (x35*x37) * one]
    out['p'] = [(x42) * one]
    out['w'] = [(x47*x48) * one, (-x48*x51) * one]
    out['grad_w'] = [(x55) * one, (-x44*x58*x59) * one, (x59*x62) * one, (-x55) * one]
    out['theta'] = [(-x59*x65) * one]
    out['grad_theta'] = [(x66*x67) * one, (x66*x68) * one]
    out['q'] = [(x53) * one]
    out['f_smooth'] = [(pi*(-x0*x73 + x19*x24*x72 - x20*x71 + x22*x59*x72 + x37*x76 - x69 + 200*x70)) * one, (pi*((999/125)*pi*x1*x13*x3*x7*x8 - 200*x15 + 8*x18*x26*x4*x7*x78 + 4*x18*x28*x4*x7*x78 - x36*x76 - x6*x73 - x77)) * one]
    out['y_d'] = [(pi*(x0*x87 + x10 + x15*x44*x52*x58 - 400*x47 - x6*x82 - x63*x80 - x68*x84 - x68*x86 + x70*x85 + x77 + x79*x80 + x81)) * one, (pi*(x0*x82 + x15*x85 - x16 + 400*x51 + x52*x62*x70 - x6*x87 + x64*x71 + x67*x84 + x67*x86 + x69 - x71*x79 - x88)) * one]
    out['omega_d'] = [(pi*(x1*x88 + x12*x4*x48 + x2*x81 - x32*x89 - x33*x89 - x74*x90 + x90*(-1000*rho1 + x74))) * one]
    out['nu'] = [((1/1000)*x74) * one]
    out['grad_nu'] = [((999/1000)*x2) * one, ((999/1000)*x1) * one]
    out['hess_nu'] = [(0) * one, (999/1000) * one, (999/1000) * one, (0) * one]
    out['beta'] = [(x11) * one, (x17) * one]
    out['div_beta'] = [(0) * one]
    out['grad_beta'] = [(x21) * one, (x25) * one, (x30) * one, (x31) * one]
    out['sigma'] = [(100) * one]
    return out


def ex52_fields(x1, x2, rho1=0.0, rho2=0.0):
    one = np.ones_like(x1)
    x0 = 2*x2
    x3 = x1 - 1
    x4 = x2 + x3
    x5 = exp(-50)
    x6 = (1 - x5)**(-1.0)
    x7 = exp(-50*x1)
    x8 = x3 + x6*(-x5 + x7)
    x9 = x4*x8
    x10 = x1*x9
    x11 = 50*x6
    x12 = -x11*x7 + 1
    x13 = x1*x4
    x14 = x12*x13
    x15 = x1*x8
    x16 = 2*x15
    x17 = x2**2
    x18 = x17*x4
    x19 = x15*x2
    x20 = x2*x9
    x21 = x1*x2
    x22 = x12*x4
    x23 = x21*x22
    x24 = x4**2
    x25 = x24*x8
    x26 = x12*x24
    x27 = x1*x26
    x28 = 2*x1
    x29 = x28*x9
    x30 = x25 + x27 + x29
    x31 = x19 + x20 + x23 + x30
    x32 = x0*x31
    x33 = x2*x4
    x34 = x24*x6
    x35 = x34*x7
    x36 = 1250*x35
    x37 = 2*x9
    x38 = 2*x17
    x39 = x1*x25
    x40 = 4*x21
    x41 = x40*x9
    x42 = x1*x17
    x43 = x12*x18
    x44 = x17*x37 + x28*x43
    x45 = 4*x19
    x46 = x17*x8
    x47 = x12*x42
    x48 = x35*x42
    x49 = x6*x7
    x50 = x13*x17*x49
    x51 = 3750*x17*x35 + 4*x20 + 4*x23 + x30 + 6*x43 + x45 + 4*x46 + 4*x47 - 62500*x48 + 7500*x50
    x52 = 1250*x50
    x53 = x43 + x52
    x54 = pi*x0
    x55 = exp(-50*x2)
    x56 = -x11*x55 + 1
    x57 = x33*x56
    x58 = x2 - 1
    x59 = x58 + x6*(-x5 + x55)
    x60 = x0*x59
    x61 = x4*x59
    x62 = x57 + x60 + x61
    x63 = x1**2
    x64 = x4*x63
    x65 = x1*x61
    x66 = x2*x59
    x67 = x1*x66
    x68 = x4*x56
    x69 = x21*x68
    x70 = x24*x59
    x71 = x24*x56
    x72 = x0*x61 + x2*x71 + x70
    x73 = x65 + x67 + x69 + x72
    x74 = x28*x73
    x75 = x34*x55
    x76 = 1250*x75
    x77 = 2*x61
    x78 = x0*x68 + x2*x76 + x66 + x71 + x77
    x79 = 2*x63
    x80 = 4*x13
    x81 = x63 + x80
    x82 = x63*x71
    x83 = x59*x63
    x84 = x40*x61
    x85 = x2*x63
    x86 = x56*x64
    x87 = x0*x86 + x63*x77
    x88 = x56*x85
    x89 = x55*x6
    x90 = x33*x63*x89
    x91 = 1250*x90
    x92 = x1*x71
    x93 = x0*x13
    x94 = 4*x67
    x95 = 3*x2*x61 + x21*x76 + x28*x61 + x56*x93 + x83 + x86 + x88 + x91 + x92 + x94
    x96 = 3750*x63
    x97 = 62500*x85
    x98 = 7500*x90
    x99 = pi*x28
    x100 = -x12
    x101 = x21*x4
    x102 = -x8
    x103 = x102*x21
    x104 = x4**2
    x105 = x100*x104
    x106 = x102*x4
    x107 = 1250*x21
    x108 = x21 + 1000
    x109 = (1/250)*x108
    x110 = x1*x4*x8 - x12*x17*x28 + x45 - 2*x46 - x53
    x111 = 12*x21
    x112 = 200*x21
    x113 = 4*x17
    x114 = x113*x15
    x115 = x114 + x25*x28
    x116 = x0*x25 + x0*x27 + 200*x42*x9
    x117 = (1/512)*pi
    x118 = (1/500)*x108
    x119 = 6*x17
    x120 = x17*x25
    x121 = x17*x27
    x122 = x26*x38 + 2500*x48
    x123 = -x59
    x124 = x123*x21
    x125 = 4*x124
    x126 = x123*x63
    x127 = -x56
    x128 = x127*x85
    x129 = x127*x64
    x130 = x104*x89
    x131 = x101*x127
    x132 = x104*x123
    x133 = x104*x127
    x134 = x123*x4
    x135 = x0*x134 + x132 + x133*x2
    x136 = x123*x80 + x125 + 4*x126 + 4*x128 + 6*x129 - x130*x96 + x130*x97 + 4*x131 + x135 - x98
    x137 = x0*x126 + x0*x129 + x125*x4 + 2*x126*x4 - 1250*x130*x85 + x132*x2 + x133*x63
    x138 = x1**3
    x139 = 6*x63
    x140 = x123*x13 + x124 + x131 + x135
    x141 = x0*x92 + x17*x29 + x28*x70 - 99999/500*x61*x85 + 4*x63*x66
    x142 = (1/500)*x137
    x143 = (1/500)*x123
    x144 = (1/1000)*x2
    out = {}
    out['y'] = [(-x0*x10*(x0 + x3)) * one, (x18*(x14 + x16 + x9)) * one]
    out['grad_y'] = [(-x32) * one, (-x16*(x17 + x24 + 4*x33)) * one, (x38*(x1*x36 + x15 + x22*x28 + x26 + x37)) * one, (x32) * one]
    out['omega'] = [(2*x16*x17 + 2*x17*x26 + 2*x36*x42 + 2*x39 + 2*x41 + 2*x44) * one]
    out['grad_omega'] = [(2*x51) * one, (4*x0*x14 + 4*x0*x9 + 12*x10 + 4*x2*x26 + 4*x21*x36 + 4*x45 + 4*x46 + 4*x47 + 4*x53) * one]
    out['p'] = [((1/1024)*cos(x54)) * one]
    out['w'] = [(-x62*x64) * one, (x0*x65*(x28 + x58)) * one]
    out['grad_w'] = [(-x74) * one, (-x78*x79) * one, (x60*(x24 + x81)) * one, (x74) * one]
    out['theta'] = [(2*x0*x83 + 2*x2*x70 + 2*x76*x85 + 2*x82 + 2*x84 + 2*x87) * one]
    out['grad_theta'] = [(4*x95) * one, (8*x65 + 8*x69 + 2*x72 + 2*x75*x96 - 2*x75*x97 + 8*x83 + 12*x86 + 8*x88 + 2*x94 + 2*x98) * one]
    out['q'] = [((1/1024)*cos(x99)) * one]
    out['f_smooth'] = [((1/500)*x1*x110*x4 - x109*(x0*x106 + x100*x18 + x100*x42 + x100*x93 + 3*x102*x13 + x102*x17 + 4*x103 - x104*x107*x49 + x105*x2 - x52) - x111*x9 - x112*x25 - x115 - x116 - 1/250*x17*(x1*x105 + x100*x101 + x102*x104 + x102*x33 + x103 + x106*x28) - x44) * one, ((1/500)*x110*x33 + x114 + x116 - x117*sin(x54) - x118*x51 + x119*x14 + x119*x9 + 100*x120 + 100*x121 + x122 - 1/250*x21*x31 + x41) * one]
    out['y_d'] = [(2*rho1*x136 - x0*x39 + (1/500)*x1*x137 + (1/500)*x1*x140*x2 + (1/250)*x1*x2*x73 + (1/500)*x108*x136 - x117*sin(x99) + (1/500)*x138*x78 - x139*x57 - x139*x61 - x141 + 100*x2*x24*x56*x63 - 1/500*x21*x70 + 100*x24*x59*x63 - x71*x79 - 2500*x75*x85 - x84) * one, (4*rho1*x95 + x0*x70 - x109*(x1*x133 - x107*x130 + 3*x123*x33 + x125 + x126 + x127*x93 + x128 + x129 + x134*x28 - x91) + x111*x61 - x112*x70 + x120 + x121 + (1/250)*x140*x63 + x141 - x142*x2 + x143*x17*(x104 + x81) + x144*x82 + (1/1000)*x63*x70 + (1/500)*x63*x73 + x87) * one]
    out['omega_d'] = [(x113*x14 + x113*x9 + x115 - x118*x137 + x122 - 1/1000*x138*x4*x62 + x142*(-1000*rho1 + x108) + x143*x42*(x104 + x13) + 8*x21*x9) * one]
    out['nu'] = [((1/1000)*x21 + 1) * one]
    out['grad_nu'] = [(x144) * one, ((1/1000)*x1) * one]
    out['hess_nu'] = [(0) * one, (1/1000) * one, (1/1000) * one, (0) * one]
    out['beta'] = [(1) * one, (1) * one]
    out['div_beta'] = [(0) * one]
    out['grad_beta'] = [(0) * one, (0) * one, (0) * one, (0) * one]
    out['sigma'] = [(100) * one]
    return out
