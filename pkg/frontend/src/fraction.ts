/** Exact rational arithmetic over bigint, mirroring the server's use of
 * exact fractions for final scores. Values are kept normalized: the
 * denominator is positive and the pair is reduced to lowest terms. */

function gcd(a: bigint, b: bigint): bigint {
  let x = a < 0n ? -a : a;
  let y = b < 0n ? -b : b;
  while (y !== 0n) {
    [x, y] = [y, x % y];
  }
  return x;
}

export class Frac {
  readonly num: bigint;
  readonly den: bigint;

  constructor(num: bigint, den: bigint = 1n) {
    if (den === 0n) {
      throw new RangeError("zero denominator");
    }
    if (den < 0n) {
      num = -num;
      den = -den;
    }
    const g = gcd(num, den);
    this.num = g === 0n ? 0n : num / g;
    this.den = g === 0n ? 1n : den / g;
  }

  /** Parse the server's fraction rendering: "15/13", "1", "-3/4". */
  static parse(text: string): Frac {
    const match = /^(-?\d+)(?:\/(\d+))?$/.exec(text.trim());
    if (match === null) {
      throw new RangeError(`not a fraction: ${JSON.stringify(text)}`);
    }
    return new Frac(BigInt(match[1]), match[2] === undefined ? 1n : BigInt(match[2]));
  }

  static fromInt(n: number): Frac {
    if (!Number.isInteger(n)) {
      throw new RangeError(`not an integer: ${n}`);
    }
    return new Frac(BigInt(n));
  }

  add(other: Frac): Frac {
    return new Frac(this.num * other.den + other.num * this.den, this.den * other.den);
  }

  sub(other: Frac): Frac {
    return new Frac(this.num * other.den - other.num * this.den, this.den * other.den);
  }

  mul(other: Frac): Frac {
    return new Frac(this.num * other.num, this.den * other.den);
  }

  div(other: Frac): Frac {
    if (other.num === 0n) {
      throw new RangeError("division by zero");
    }
    return new Frac(this.num * other.den, this.den * other.num);
  }

  eq(other: Frac): boolean {
    return this.num === other.num && this.den === other.den;
  }

  isZero(): boolean {
    return this.num === 0n;
  }

  /** Canonical string: "num/den", or just "num" when den is 1. */
  toString(): string {
    return this.den === 1n ? this.num.toString() : `${this.num}/${this.den}`;
  }

  /** Fixed-point rendering with round-half-up, exact (no float detour).
   * Matches the server's display rule: 5/4 -> "1.25", 1/200 -> "0.01". */
  toFixedHalfUp(places: number): string {
    if (places < 0 || !Number.isInteger(places)) {
      throw new RangeError(`bad precision: ${places}`);
    }
    const negative = this.num < 0n;
    const scale = 10n ** BigInt(places);
    const scaled = (negative ? -this.num : this.num) * scale;
    let quotient = scaled / this.den;
    const remainder = scaled % this.den;
    if (remainder * 2n >= this.den) {
      quotient += 1n;
    }
    const whole = quotient / scale;
    const sign = negative && quotient !== 0n ? "-" : "";
    if (places === 0) {
      return sign + whole.toString();
    }
    const fracDigits = (quotient % scale).toString().padStart(places, "0");
    return `${sign}${whole}.${fracDigits}`;
  }
}

export const ZERO = new Frac(0n);
