/**
 * Agreement-band wording for Fleiss' kappa, mirroring the server's bands:
 * exactly 1.0 is its own "perfect" band, the rest are left-closed ranges,
 * and anything below 0.4 (including negative chance-level scores) is poor.
 */

export type KappaBand =
  | 'Perfect agreement'
  | 'Substantial agreement'
  | 'Moderate agreement'
  | 'Fair agreement'
  | 'Poor agreement';

export function interpretKappa(kappa: number): KappaBand {
  if (Number.isNaN(kappa) || kappa > 1) {
    throw new RangeError(`kappa out of range: ${kappa}`);
  }
  if (kappa === 1.0) return 'Perfect agreement';
  if (kappa >= 0.8) return 'Substantial agreement';
  if (kappa >= 0.6) return 'Moderate agreement';
  if (kappa >= 0.4) return 'Fair agreement';
  return 'Poor agreement';
}

/** CSS modifier for the stats badge of a given band. */
export function badgeClass(band: KappaBand): string {
  switch (band) {
    case 'Perfect agreement':
      return 'badge-perfect';
    case 'Substantial agreement':
      return 'badge-substantial';
    case 'Moderate agreement':
      return 'badge-moderate';
    case 'Fair agreement':
      return 'badge-fair';
    case 'Poor agreement':
      return 'badge-poor';
  }
}

/** "0.8312 (Substantial agreement)" or a dash when undefined. */
export function formatKappa(kappa: number | null): string {
  if (kappa === null) return 'n/a';
  return `${kappa.toFixed(4)} (${interpretKappa(kappa)})`;
}
