/** Display formatting. Raw payload numbers ride along in data-value
 * attributes; only the visible text is rounded. */

export function fmtMw(value: number): string {
  const abs = Math.abs(value);
  const digits = abs >= 100 ? 1 : abs >= 1 ? 2 : 3;
  return `${value.toFixed(digits)} MW`;
}

export function fmtHour(timestamp: string): string {
  return timestamp.slice(11, 16);
}

export function fmtDay(timestamp: string): string {
  return timestamp.slice(0, 10);
}

export function fmtShare(value: number): string {
  return value.toFixed(3);
}
